"""CSV emission.  Floats use 17 significant digits so a re-parse is exact."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .sweep import ScalingReport


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _expand(columns: Mapping[str, Sequence]):
    names, cols = [], []
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            names += [f"{name}_re", f"{name}_im"]
            cols += [arr.real, arr.imag]
        else:
            names.append(name)
            cols.append(arr)
    return names, cols


def write_series(columns: Mapping[str, Sequence], path) -> Path:
    """Write named equal-length columns; complex columns split into _re/_im."""
    path = Path(path)
    names, cols = _expand(columns)
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*cols):
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    return path


def write_report(report: ScalingReport, path) -> Path:
    """``lambda,error`` rows plus a ``.meta.json`` sidecar with the fit."""
    path = Path(path)
    write_series({"lambda": report.lambdas, "error": report.errors}, path)
    meta = asdict(report)
    meta.pop("lambdas")
    meta.pop("errors")
    with open(path.with_suffix(".meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_csv(obj, path) -> Path:
    """Dispatch on a :class:`ScalingReport` or a column mapping."""
    if isinstance(obj, ScalingReport):
        return write_report(obj, path)
    return write_series(obj, path)


def read_csv(path) -> dict:
    """Read back a file written by :func:`write_series` as float columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [float(r[i]) for r in body] for i, name in enumerate(header)}
