"""Unions of axis-aligned hyper-rectangles and their flat parameter encoding.

A union of L boxes in p dimensions is searched as a vector of 2pL reals laid
out box by box, dimension by dimension, as ``(low, high)`` pairs; i.e. the
vector reshapes to ``(L, p, 2)``.

Boxes are closed: a point on a face is inside. Two boxes are disjoint when
some axis j has ``max(a.lower[j], b.lower[j]) > min(a.upper[j], b.upper[j])``;
with the strict inequality, boxes sharing only a face are *not* disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class HyperRectangle:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if any(not lo < hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"box needs lower < upper on every axis: {lower} vs {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def p(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lower) + np.asarray(self.upper)) / 2

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.upper) - np.asarray(self.lower)))

    def mask(self, x: np.ndarray) -> np.ndarray:
        """Membership of each row of ``x`` (shape (n, p))."""
        x = np.asarray(x, dtype=float)
        _check_dim(self.p, x.shape[-1])
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}


class RegionUnion:
    """An ordered collection of L boxes of a common dimension p.

    Construction checks shapes only; disjointness is reported by
    :func:`is_valid_union` (``decode`` never returns an overlapping union).
    Equality ignores box order.
    """

    __slots__ = ("boxes", "p")

    def __init__(self, boxes: Sequence[HyperRectangle]):
        boxes = tuple(boxes)
        if not boxes:
            raise ValueError("a region needs at least one box")
        p = boxes[0].p
        if any(b.p != p for b in boxes):
            raise ValueError("all boxes must share the same dimension")
        self.boxes = boxes
        self.p = p

    @property
    def L(self) -> int:
        return len(self.boxes)

    def mask(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.boxes[0].mask(x)
        for b in self.boxes[1:]:
            out |= b.mask(x)
        return out

    @property
    def center_of_mass(self) -> np.ndarray:
        """Volume-weighted centre of the union (the box centre when L = 1)."""
        vols = np.array([b.volume for b in self.boxes])
        centers = np.array([b.center for b in self.boxes])
        return vols @ centers / vols.sum()

    def to_json(self) -> list[dict]:
        return [b.to_json() for b in self.boxes]

    @classmethod
    def from_json(cls, obj) -> "RegionUnion":
        return cls([HyperRectangle(tuple(b["lower"]), tuple(b["upper"])) for b in obj])

    def __eq__(self, other):
        if not isinstance(other, RegionUnion):
            return NotImplemented
        return self.p == other.p and sorted(
            self.boxes, key=_box_key) == sorted(other.boxes, key=_box_key)

    def __hash__(self):
        return hash(frozenset(self.boxes))

    def __repr__(self):
        return f"RegionUnion({list(self.boxes)!r})"


def _box_key(b: HyperRectangle):
    return (b.lower, b.upper)


def _check_dim(expected: int, got: int) -> None:
    if expected != got:
        raise ValueError(f"dimension mismatch: region has p={expected}, point has {got}")


def contains(b: HyperRectangle, point) -> bool:
    point = np.asarray(point, dtype=float).reshape(-1)
    _check_dim(b.p, point.size)
    return bool(np.all(point >= b.lower) and np.all(point <= b.upper))


def contains_union(r: RegionUnion, point) -> bool:
    return any(contains(b, point) for b in r.boxes)


def pair_disjoint(a: HyperRectangle, b: HyperRectangle) -> bool:
    _check_dim(a.p, b.p)
    return any(max(al, bl) > min(au, bu)
               for al, bl, au, bu in zip(a.lower, b.lower, a.upper, b.upper))


def is_valid_union(r: RegionUnion) -> bool:
    # HyperRectangle already enforces lower < upper
    return all(pair_disjoint(a, b) for a, b in combinations(r.boxes, 2))


def decode(v, L: int, p: int) -> RegionUnion | None:
    """Map a 2pL vector to a region, or ``None`` if it is not a valid union.

    Reversed pairs are swapped; zero-width pairs and overlapping boxes give
    ``None``.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != 2 * p * L:
        raise ValueError(f"parameter vector has length {v.size}, expected 2pL = {2 * p * L}")
    pairs = v.reshape(L, p, 2)
    lo = pairs.min(axis=2)
    hi = pairs.max(axis=2)
    if np.any(lo == hi):
        return None
    r = RegionUnion([HyperRectangle(tuple(lo[l]), tuple(hi[l])) for l in range(L)])
    return r if is_valid_union(r) else None


def encode(r: RegionUnion) -> np.ndarray:
    out = np.empty((r.L, r.p, 2))
    for l, b in enumerate(r.boxes):
        out[l, :, 0] = b.lower
        out[l, :, 1] = b.upper
    return out.reshape(-1)


def decode_batch(V: np.ndarray, L: int, p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`decode` over the rows of ``V``.

    Returns ``(lo, hi, valid)`` with ``lo``/``hi`` of shape (B, L, p).
    """
    V = np.asarray(V, dtype=float)
    B = V.shape[0]
    pairs = V.reshape(B, L, p, 2)
    lo = pairs.min(axis=3)
    hi = pairs.max(axis=3)
    valid = np.all(lo < hi, axis=(1, 2))
    for a, b in combinations(range(L), 2):
        sep = np.maximum(lo[:, a], lo[:, b]) > np.minimum(hi[:, a], hi[:, b])
        valid &= sep.any(axis=1)
    return lo, hi, valid
