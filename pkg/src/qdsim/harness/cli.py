"""``qdsim`` command-line front end.

Every subcommand reads the config, runs one pipeline stage and writes a CSV
dataset (with JSON sidecar) and/or a JSON report into ``--out``.  Exit codes:
0 ok, 2 config/validation error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, NumericError, QdsimError
from . import pipelines as pl
from .config import load_config
from .io import export_dataset, import_dataset, write_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _on_off(s):
    if s not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return s == "on"


def build_parser():
    p = argparse.ArgumentParser(prog="qdsim", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML experiment config")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="line energies (one field or a fan)")
    s.add_argument("--B", type=float, help="single field in T; omit for the field sweep")
    sub.add_parser("rabi", parents=[common], help="power-dependent Rabi scan + background")
    sub.add_parser("ramsey", parents=[common], help="coarse x fine Ramsey grid")
    s = sub.add_parser("su2", parents=[common], help="two-pulse (power, fine delay) map")
    s.add_argument("--drift", type=_on_off, default=False, metavar="on|off")
    s.add_argument("--correct", type=_on_off, default=False, metavar="on|off")
    sub.add_parser("polarimetry", parents=[common], help="rotating-waveplate scans per line")

    s = sub.add_parser("correct-drift", parents=[common], help="HeNe-based map correction")
    s.add_argument("--input", type=Path, help="Su2Map CSV (default OUT/su2.csv)")
    s.add_argument("--hene", type=Path, help="HeNe CSV (default OUT/hene.csv)")
    for name, default in [("fit-rabi", "rabi.csv"), ("fit-ramsey", "ramsey.csv"),
                          ("fit-zeeman", "spectrum.csv"), ("fit-polarimetry", "polarimetry.csv")]:
        s = sub.add_parser(name, parents=[common], help=f"fit a dataset (default OUT/{default})")
        s.add_argument("--input", type=Path)
    s = sub.add_parser("plot", parents=[common], help="render a dataset CSV as SVG")
    s.add_argument("--input", type=Path, required=True)
    s = sub.add_parser("reproduce", parents=[common], help="end-to-end pipelines + criteria")
    s.add_argument("--criteria", type=_on_off, default=True, metavar="on|off",
                   help="also evaluate the acceptance criteria (slow)")
    return p


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _input(args, default):
    return args.input if getattr(args, "input", None) else args.out / default


def _log(msg):
    print(f"qdsim: {msg}", file=sys.stderr)


def _write(ds, path):
    export_dataset(ds, path)
    _log(f"wrote {path}")


def _report(rep, path):
    write_report(rep, path)
    _log(f"wrote {path}")


def run(args) -> int:
    cfg = _config(args)
    out = args.out
    cmd = args.command
    base = {"config_hash": cfg.hash, "seed": cfg.seed}

    if cmd == "spectrum":
        ds = pl.spectrum_dataset(cfg, args.B)
        _write(ds, out / "spectrum.csv")
        _report({**base, "kind": "Spectrum", "n_rows": len(ds),
                 "fields_T": sorted(set(ds["B_T"].tolist()))}, out / "spectrum_report.json")
    elif cmd == "rabi":
        ds = pl.rabi_dataset(cfg)
        _write(ds, out / "rabi.csv")
        _report({**base, "kind": "Rabi", **ds.metadata}, out / "rabi_report.json")
    elif cmd == "ramsey":
        ds = pl.ramsey_dataset(cfg)
        _write(ds, out / "ramsey.csv")
        _report({**base, "kind": "Ramsey", **ds.metadata}, out / "ramsey_report.json")
    elif cmd == "su2":
        drift = pl.drift_trace(cfg) if args.drift else None
        data = pl.su2_run(cfg, drift)
        ds = pl.su2_dataset(cfg, data, drift=args.drift, diagnostics=data.diagnostics)
        _write(ds, out / "su2.csv")
        rep = {**base, "kind": "Su2Map", "drift": args.drift, "corrected": False,
               "diagnostics": data.diagnostics}
        if args.drift:
            hene, dtrace = pl.hene_datasets(cfg, drift)
            _write(hene, out / "hene.csv")
            _write(dtrace, out / "drift.csv")
            rep["drift_span_nm"] = float(drift.path_drift.max() - drift.path_drift.min())
            if args.correct:
                _write(pl.correct_dataset(cfg, ds, hene), out / "su2_corrected.csv")
                rep["corrected"] = True
        elif args.correct:
            _log("--correct on ignored without --drift on")
        _report(rep, out / "su2_report.json")
    elif cmd == "polarimetry":
        ds = pl.polarimetry_dataset(cfg)
        _write(ds, out / "polarimetry.csv")
        _report({**base, "kind": "Polarimetry", **ds.metadata}, out / "polarimetry_report.json")
    elif cmd == "correct-drift":
        su2 = import_dataset(_input(args, "su2.csv"))
        hene = import_dataset(args.hene or out / "hene.csv")
        ds = pl.correct_dataset(cfg, su2, hene)
        _write(ds, out / "su2_corrected.csv")
        _report({**base, "kind": "DriftCorrection", "source_config_hash":
                 su2.metadata.get("config_hash")}, out / "correct_drift_report.json")
    elif cmd in ("fit-rabi", "fit-ramsey", "fit-zeeman", "fit-polarimetry"):
        name = cmd.split("-", 1)[1]
        default = {"zeeman": "spectrum.csv"}.get(name, f"{name}.csv")
        ds = import_dataset(_input(args, default))
        fit = {"rabi": pl.fit_rabi_dataset, "ramsey": pl.fit_ramsey_dataset,
               "zeeman": pl.fit_zeeman_dataset, "polarimetry": pl.fit_polarimetry_dataset}[name]
        rep = fit(ds)
        _report({**base, "source_config_hash": ds.metadata.get("config_hash"), **rep},
                out / f"fit_{name}.json")
    elif cmd == "plot":
        from .plotting import plot_dataset

        ds = import_dataset(args.input)
        path = out / (args.input.stem + ".svg")
        plot_dataset(ds, path)
        _log(f"wrote {path}")
    elif cmd == "reproduce":
        from .reproduce import reproduce

        rep = reproduce(cfg, criteria=args.criteria, log=_log)
        _report(rep, out / "reproduce_report.json")
        if args.criteria:
            for c in rep["criteria"]:
                _log(f"{c['id']}: {'PASS' if c['passed'] else 'FAIL'}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except NumericError as exc:
        _log(f"numeric error ({type(exc).__name__}): {exc}")
        return EXIT_NUMERIC
    except (QdsimError, ValueError) as exc:
        _log(f"invalid input ({type(exc).__name__}): {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _log(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
