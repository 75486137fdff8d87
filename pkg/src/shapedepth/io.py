"""CSV and JSON formats shared by the library and the command line."""

import csv
import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError


class ParseError(DomainError):
    """Malformed input file."""


@dataclass
class DataSet:
    """Observations ``X`` (n x k) with optional group labels."""

    X: np.ndarray
    groups: np.ndarray = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    def group_items(self):
        """``(label, rows)`` pairs in order of first appearance."""
        if self.groups is None:
            raise DomainError("data set has no group column")
        labels = list(dict.fromkeys(self.groups.tolist()))
        return [(g, self.X[self.groups == g]) for g in labels]


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_dataset(text, has_group=None):
    """Parse a data CSV.

    A header row is optional; it is recognized by a non-numeric first
    data column.  A leading ``group`` column is used when the header names it,
    or when ``has_group`` is true.  Values must be finite.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("no observations")
    header = None
    if not all(_is_number(c) for c in rows[0][1:]) or (
            not _is_number(rows[0][0]) and has_group is not True):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if has_group is None:
        has_group = header is not None and header[0].lower() == "group"
    width = len(rows[0]) if rows else 0
    groups, values = [], []
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != width:
            raise ParseError(f"line {lineno}: expected {width} fields, got {len(row)}")
        fields = row[1:] if has_group else row
        try:
            vals = [float(c) for c in fields]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in vals):
            raise ParseError(f"line {lineno}: non-finite value")
        values.append(vals)
        if has_group:
            groups.append(row[0].strip())
    if not values or not values[0]:
        raise ParseError("no numeric columns")
    X = np.array(values, dtype=float)
    return DataSet(X, np.array(groups) if has_group else None)


def read_dataset(path, has_group=None):
    with open(path, newline="") as fh:
        return parse_dataset(fh.read(), has_group)


def format_dataset(ds):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = ds.k
    cols = [f"x{i + 1}" for i in range(k)]
    if ds.groups is not None:
        w.writerow(["group"] + cols)
        for g, row in zip(ds.groups, ds.X):
            w.writerow([g] + [repr(float(v)) for v in row])
    else:
        w.writerow(cols)
        for row in ds.X:
            w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_dataset(path, ds):
    with open(path, "w", newline="") as fh:
        fh.write(format_dataset(ds))


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()
