"""Tabular (y, X) data: loading, validation, splitting and resampling.

Shuffles use ``numpy.random.default_rng(seed)`` (PCG64), whose output for a
given integer seed is fixed across platforms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    """Raised for unreadable or invalid input data."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """n paired samples of a response ``y`` and p state variables ``x``.

    Arrays are copied and frozen on construction.
    """

    y: np.ndarray
    x: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise DataError(f"x must be 2-dimensional, got shape {x.shape}")
        if y.size < 1 or x.shape[1] < 1:
            raise DataError("dataset needs n >= 1 and p >= 1")
        if x.shape[0] != y.size:
            raise DataError(f"y has {y.size} rows but x has {x.shape[0]}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DataError("dataset contains non-finite values")
        names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise DataError(f"{len(names)} feature names for {x.shape[1]} columns")
        y.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index, dtype=np.intp)
        return Dataset(self.y[index], self.x[index], self.feature_names)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.x, other.x)
        )

    __hash__ = None


@dataclass(frozen=True)
class DomainBounds:
    """Per-dimension search box for the optimizer."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have the same length")
        if any(not lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("DomainBounds requires lower[j] < upper[j] for every j")

    @property
    def width(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    assignment: np.ndarray

    def fold(self, f: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (train_index, test_index) for fold ``f``."""
        test = np.flatnonzero(self.assignment == f)
        train = np.flatnonzero(self.assignment != f)
        return train, test

    def sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.k).tolist()


def domain_bounds(d: Dataset, padding: float = 0.01) -> DomainBounds:
    """Observed min/max per dimension, widened by ``padding`` x range on each side.

    A constant column gets a pad relative to its magnitude so the box stays
    non-degenerate.
    """
    lo = d.x.min(axis=0)
    hi = d.x.max(axis=0)
    rng = hi - lo
    scale = np.where(rng > 0, rng, np.maximum(np.abs(lo), 1.0))
    pad = padding * scale
    return DomainBounds(tuple((lo - pad).tolist()), tuple((hi + pad).tolist()))


def load_csv(path, response_column: str, feature_columns: Sequence[str]) -> Dataset:
    """Read a header-first, comma-separated numeric CSV.

    Any missing, unparseable or non-finite cell in a referenced column
    aborts the load with a message naming the row and column.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    feature_columns = list(feature_columns)
    if not feature_columns:
        raise DataError("at least one feature column is required")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        wanted = [response_column] + feature_columns
        missing = [c for c in wanted if c not in header]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        cols = [header.index(c) for c in wanted]
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            values = []
            for name, ci in zip(wanted, cols):
                cell = record[ci].strip() if ci < len(record) else ""
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise DataError(f"{path}: row {lineno}, column {name!r}: invalid value {cell!r}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    return Dataset(arr[:, 0], arr[:, 1:], tuple(feature_columns))


def write_csv(d: Dataset, path, response_column: str = "y") -> None:
    """Write ``d`` so that :func:`load_csv` reproduces it exactly (floats via repr)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join((response_column,) + d.feature_names) + "\n")
        for yi, xi in zip(d.y.tolist(), d.x.tolist()):
            fh.write(",".join(repr(v) for v in [yi] + xi) + "\n")


def split(d: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded random train/test split; both parts keep the original row order."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_train = int(round(d.n * train_fraction))
    if n_train < 1 or n_train >= d.n:
        raise ValueError(f"split of n={d.n} at {train_fraction} leaves an empty part")
    perm = np.random.default_rng(seed).permutation(d.n)
    return d.subset(np.sort(perm[:n_train])), d.subset(np.sort(perm[n_train:]))


def kfold(d: Dataset, k: int, seed: int) -> FoldAssignment:
    if not 2 <= k <= d.n:
        raise ValueError(f"k must satisfy 2 <= k <= n={d.n}, got {k}")
    perm = np.random.default_rng(seed).permutation(d.n)
    assignment = np.empty(d.n, dtype=np.intp)
    assignment[perm] = np.arange(d.n) % k
    assignment.flags.writeable = False
    return FoldAssignment(k, assignment)


def resample_index(n: int, seed: int) -> np.ndarray:
    """n row indices drawn i.i.d. uniformly with replacement."""
    return np.random.default_rng(seed).integers(0, n, size=n)


def bootstrap_resample(d: Dataset, seed: int) -> Dataset:
    return d.subset(resample_index(d.n, seed))
