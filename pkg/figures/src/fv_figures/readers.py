"""CSV readers that enforce the producing toolkit's column contracts."""

from __future__ import annotations

import csv
import pathlib

import numpy as np

from .errors import EmptyInput, MissingColumn

# columns each figure kind consumes, in contract order
REQUIRED = {
    "envelope": ("scale", "c_hat", "c_theory", "pass"),
    "dimension": ("scale", "count", "slope", "ci_lo", "ci_hi"),
    "tm_decay": ("m", "mean", "stderr", "bound_gamma", "bound_lambda"),
    "cdi_trend": ("method", "level", "value", "verdict"),
    "radius": ("t", "ratio"),
}

_TEXT_COLUMNS = {"method", "verdict"}


class Frame:
    """Columns of one CSV, numeric ones as float arrays."""

    def __init__(self, path, columns: dict):
        self.path = pathlib.Path(path)
        self.columns = columns

    def __getitem__(self, name):
        return self.columns[name]

    @property
    def nrows(self) -> int:
        first = next(iter(self.columns.values()))
        return len(first)


def read_frame(path, kind: str) -> Frame:
    """Load the columns `kind` needs, failing loudly on contract breaks."""
    required = REQUIRED[kind]
    p = pathlib.Path(path)
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"{p} is empty") from None
        rows = list(reader)
    for col in required:
        if col not in header:
            raise MissingColumn(col, p)
    if not rows:
        raise EmptyInput(f"{p} has a header but no data rows")
    idx = {col: header.index(col) for col in required}
    columns = {}
    for col in required:
        raw = [row[idx[col]] for row in rows]
        if col in _TEXT_COLUMNS:
            columns[col] = raw
        else:
            columns[col] = np.array([float(v) for v in raw])
    return Frame(p, columns)
