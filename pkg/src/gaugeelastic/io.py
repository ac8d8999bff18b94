"""CSV output with round-trip precision and a JSON sidecar header."""

from __future__ import annotations

import json
import os
from typing import Sequence

import numpy as np

from . import __version__

FLOAT_FORMAT = "%.17g"


def write_csv(path, columns: Sequence[str], rows, meta=None):
    """Write rows with 17 significant digits plus ``<path>.json`` describing the columns."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(columns):
        raise ValueError(f"{len(columns)} columns but rows have width {rows.shape[1]}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for r in rows if rows.size else []:
            fh.write(",".join(FLOAT_FORMAT % v for v in r) + "\n")
    side = {"columns": list(columns), "rows": int(rows.shape[0]) if rows.size else 0,
            "version": __version__}
    if meta:
        side.update(meta)
    write_json(path + ".json", side)


def read_csv(path):
    """(columns, array) from a file written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as fh:
        columns = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return columns, data


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)
