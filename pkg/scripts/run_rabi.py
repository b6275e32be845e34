"""Power-dependent Rabi scan with background control, fitted for the pi power.

    python scripts/run_rabi.py [--config c.toml] [--out results/rabi]
"""

import argparse
from pathlib import Path

from qdsim.harness import pipelines as pl
from qdsim.harness.config import load_config
from qdsim.harness.io import export_dataset, write_report
from qdsim.harness.plotting import plot_dataset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("results/rabi"))
    args = ap.parse_args()
    cfg = load_config(args.config)
    ds = pl.rabi_dataset(cfg)
    fit = pl.fit_rabi_dataset(ds)
    export_dataset(ds, args.out / "rabi.csv")
    write_report(fit, args.out / "fit_rabi.json")
    plot_dataset(ds, args.out / "rabi.svg")
    p = fit["params"]
    print(f"kappa = {p['kappa']:.5f} rad/uW^1/2 (true {cfg.pulse.kappa:.5f})")
    print(f"pi pulse at sqrtP = {fit['derived']['pi_sqrt_power']:.4f} uW^1/2")
    print(f"damping d = {p['damping']:.3e}")


if __name__ == "__main__":
    main()
