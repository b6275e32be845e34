"""CSV datasets with ``#`` metadata lines, JSON sidecars and reports.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.  All writes go through a temporary file and an atomic
rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import SchemaError

KINDS = ("Spectrum", "Rabi", "Ramsey", "Su2Map", "Polarimetry", "HeNe", "Drift")
FORMAT_VERSION = 1


@dataclass
class Dataset:
    kind: str
    columns: dict  # name -> 1-D array, names carry units, e.g. "fine_delay_fs"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown dataset kind {self.kind!r}")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}
        lengths = {v.shape for v in self.columns.values()}
        if len(lengths) > 1 or any(len(s) != 1 for s in lengths):
            raise SchemaError(f"columns must be 1-D and equally long, got {lengths}")
        if "config_hash" not in self.metadata:
            raise SchemaError("dataset metadata lacks config_hash")

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name):
        return self.columns[name]


def atomic_write(path, data: str | bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, (str, np.str_)):
        if "," in v or "\n" in v:
            raise SchemaError("string cells may not contain commas or newlines")
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def dataset_to_csv(ds: Dataset) -> str:
    meta = {"kind": ds.kind, "format_version": FORMAT_VERSION, **ds.metadata}
    lines = [f"# {k}: {json.dumps(meta[k], sort_keys=True)}" for k in sorted(meta)]
    names = list(ds.columns)
    lines.append(",".join(names))
    cols = [ds.columns[n] for n in names]
    for i in range(len(ds)):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def export_dataset(ds: Dataset, path):
    path = Path(path)
    atomic_write(path, dataset_to_csv(ds))
    side = {"kind": ds.kind, "format_version": FORMAT_VERSION, "columns": list(ds.columns),
            "n_rows": len(ds), **ds.metadata}
    atomic_write(path.with_suffix(".json"), json.dumps(side, sort_keys=True, indent=2) + "\n")
    return path


def _parse_column(cells):
    try:
        return np.array([float(c) for c in cells])
    except ValueError:
        return np.array(cells)


def import_dataset(path) -> Dataset:
    path = Path(path)
    meta = {}
    header = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                if header is not None:
                    raise SchemaError(f"{path}:{ln}: metadata after header")
                key, sep, val = line[1:].strip().partition(":")
                if not sep:
                    raise SchemaError(f"{path}:{ln}: malformed metadata line")
                try:
                    meta[key.strip()] = json.loads(val)
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"{path}:{ln}: bad metadata value") from exc
            elif header is None:
                header = line.split(",")
                if not all(h and not _is_number(h) for h in header):
                    raise SchemaError(f"{path}:{ln}: missing or invalid header row")
            elif line:
                cells = line.split(",")
                if len(cells) != len(header):
                    raise SchemaError(f"{path}:{ln}: expected {len(header)} cells")
                rows.append(cells)
    if header is None:
        raise SchemaError(f"{path}: no header row")
    kind = meta.pop("kind", None)
    meta.pop("format_version", None)
    if kind is None:
        raise SchemaError(f"{path}: missing kind metadata")
    cols = {h: _parse_column([r[i] for r in rows]) for i, h in enumerate(header)}
    return Dataset(kind, cols, meta)


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_report(report: dict, path):
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=True) + "\n"
    atomic_write(path, text)
    return Path(path)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x
