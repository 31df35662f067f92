"""Model-free estimates for a region: conditional mean, coverage, bootstrap SD.

The conditional mean is the average of ``y`` over samples inside the region
and coverage is the inside fraction of n. Evaluating one region costs
O(n * L * p).

The bootstrap standard deviation of the mean uses M resamples of the whole
dataset; replicate m is drawn with seed ``seed + m``. A replicate whose
resample has no point inside the region is replaced by the next seed in the
sequence (``seed + M``, ``seed + M + 1``, ...), up to ``10 * M`` draws in
total.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import Dataset, resample_index
from .region import RegionUnion

log = logging.getLogger(__name__)

MAX_ATTEMPT_FACTOR = 10


class BootstrapError(RuntimeError):
    """The bootstrap SD is undefined (empty region or too many empty replicates)."""


@dataclass(frozen=True)
class RegionEstimate:
    mean: float | None
    coverage: float
    inside_count: int


@dataclass(frozen=True)
class BootstrapConfig:
    M: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"bootstrap needs M >= 2, got {self.M}")


def _region_mask(d: Dataset, r: RegionUnion) -> np.ndarray:
    if d.p != r.p:
        raise ValueError(f"dimension mismatch: data has p={d.p}, region has p={r.p}")
    return r.mask(d.x)


def _mean_of(y: np.ndarray, mask: np.ndarray) -> float | None:
    k = int(np.count_nonzero(mask))
    if k == 0:
        return None
    return float(y[mask].sum() / k)


def saa_mean(d: Dataset, r: RegionUnion) -> float | None:
    """Average response inside ``r``; ``None`` when no sample lies inside."""
    return _mean_of(d.y, _region_mask(d, r))


def coverage(d: Dataset, r: RegionUnion) -> float:
    return int(np.count_nonzero(_region_mask(d, r))) / d.n


def estimate(d: Dataset, r: RegionUnion) -> RegionEstimate:
    mask = _region_mask(d, r)
    k = int(np.count_nonzero(mask))
    return RegionEstimate(_mean_of(d.y, mask), k / d.n, k)


class SortedAxis:
    """Samples of a 1-D dataset in ascending x order, with prefix sums of y.

    An interval ``[lo, hi]`` covers the contiguous sorted positions
    ``start:end`` returned by :meth:`positions`.
    """

    def __init__(self, d: Dataset):
        if d.p != 1:
            raise ValueError("SortedAxis needs p = 1")
        self.order = np.argsort(d.x[:, 0], kind="stable")
        self.xs = d.x[self.order, 0]
        self.ys = d.y[self.order]
        self.csum = np.concatenate(([0.0], np.cumsum(self.ys)))

    def positions(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        start = np.searchsorted(self.xs, lo, side="left")
        end = np.searchsorted(self.xs, hi, side="right")
        return start, np.maximum(end, start)


class BootstrapPlan:
    """A fixed, lazily extended pool of bootstrap resamples of one dataset.

    Every region evaluated through the same plan sees the same resamples,
    so the SD of a region is a deterministic function of the region.
    """

    def __init__(self, d: Dataset, cfg: BootstrapConfig):
        self.d = d
        self.cfg = cfg
        self.M = cfg.M
        self.max_rows = MAX_ATTEMPT_FACTOR * cfg.M
        self._counts = np.empty((0, d.n), dtype=np.int32)
        self._axis = SortedAxis(d) if d.p == 1 else None
        self._pden = None
        self._pnum = None
        self._extend(self.M)

    @property
    def rows(self) -> int:
        return self._counts.shape[0]

    def _extend(self, rows: int) -> None:
        rows = min(rows, self.max_rows)
        if rows <= self.rows:
            return
        n = self.d.n
        new = np.empty((rows - self.rows, n), dtype=np.int32)
        for i, m in enumerate(range(self.rows, rows)):
            new[i] = np.bincount(resample_index(n, self.cfg.seed + m), minlength=n)
        self._counts = np.vstack([self._counts, new])
        if self._axis is not None:
            cs = self._counts[:, self._axis.order]
            zeros = np.zeros((rows, 1))
            self._pden = np.hstack([zeros, np.cumsum(cs, axis=1, dtype=np.float64)])
            self._pnum = np.hstack([zeros, np.cumsum(cs * self._axis.ys, axis=1)])

    def _sd_from(self, num: np.ndarray, den: np.ndarray) -> float:
        """SD over the first M replicates with a non-empty resample."""
        ok = np.flatnonzero(den > 0)[: self.M]
        if ok.size < self.M:
            raise BootstrapError(
                f"only {ok.size} of {self.M} bootstrap replicates hit the region "
                f"in {self.max_rows} draws")
        means = num[ok] / den[ok]
        return float(np.std(means, ddof=1))

    def replicate_sums(self, mask: np.ndarray, rows: int) -> tuple[np.ndarray, np.ndarray]:
        idx = np.flatnonzero(mask)
        c = self._counts[:rows, idx]
        den = c.sum(axis=1).astype(float)
        num = (c * self.d.y[idx]).sum(axis=1)
        return num, den

    def sd_mask(self, mask: np.ndarray) -> float:
        """Bootstrap SD of the in-mask mean."""
        if not np.any(mask):
            raise BootstrapError("SD of the mean of an empty region is undefined")
        num, den = self.replicate_sums(mask, self.M)
        if np.all(den > 0):
            return self._sd_from(num, den)
        rows = self.M
        while True:
            rows = min(rows + self.M, self.max_rows)
            self._extend(rows)
            num, den = self.replicate_sums(mask, rows)
            if np.count_nonzero(den > 0) >= self.M or rows >= self.max_rows:
                return self._sd_from(num, den)

    def sd(self, r: RegionUnion) -> float:
        return self.sd_mask(_region_mask(self.d, r))

    def sd_intervals(self, start: np.ndarray, end: np.ndarray) -> np.ndarray:
        """SDs for 1-D unions given as sorted-position ranges.

        ``start`` and ``end`` have shape (B, L); intervals of one candidate
        must not share samples. Entries that fail return NaN.
        """
        if self._axis is None:
            raise ValueError("sd_intervals needs a 1-D dataset")
        start = np.atleast_2d(start)
        end = np.atleast_2d(end)
        B = start.shape[0]
        out = np.full(B, np.nan)
        M = self.M
        num = np.zeros((B, M))
        den = np.zeros((B, M))
        for l in range(start.shape[1]):
            num += (self._pnum[:M, end[:, l]] - self._pnum[:M, start[:, l]]).T
            den += (self._pden[:M, end[:, l]] - self._pden[:M, start[:, l]]).T
        full = np.all(den > 0, axis=1)
        if np.any(full):
            means = np.ascontiguousarray(num[full] / den[full])
            out[full] = np.std(means, axis=1, ddof=1)
        for b in np.flatnonzero(~full):
            if np.all(end[b] == start[b]):
                continue
            self._extend(self.max_rows)
            nb = np.zeros(self.rows)
            db = np.zeros(self.rows)
            for s, e in zip(start[b], end[b]):
                nb += self._pnum[:, e] - self._pnum[:, s]
                db += self._pden[:, e] - self._pden[:, s]
            try:
                out[b] = self._sd_from(nb, db)
            except BootstrapError as exc:
                log.debug("bootstrap failed for candidate %d: %s", b, exc)
        return out


def bootstrap_sd(d: Dataset, r: RegionUnion, cfg: BootstrapConfig) -> float:
    """Bootstrap standard deviation of :func:`saa_mean` over ``cfg.M`` resamples.

    Raises :class:`BootstrapError` if ``r`` holds no sample of ``d``.
    """
    return BootstrapPlan(d, cfg).sd(r)
