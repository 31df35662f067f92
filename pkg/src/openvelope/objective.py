"""Fitness of a candidate envelope.

For a parameter vector that decodes to a valid, non-empty union R::

    fitness = mean(R) - gamma * sd_bs(R) - c * max(beta - coverage(R), 0)

Anything else (overlapping boxes, zero-width sides, no sample inside, or a
bootstrap that cannot be computed) scores the sentinel ``eta``, which lies
strictly below every observed response.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .estimation import BootstrapConfig, BootstrapError, BootstrapPlan, SortedAxis
from .region import decode_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveConfig:
    beta: float
    c: float = 1.0
    gamma: float = 0.0
    eta: float | None = None  # None: default_eta of the bound dataset
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not self.c > 0:
            raise ValueError(f"penalty weight c must be > 0, got {self.c}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class FitnessBreakdown:
    raw_mean: float | None
    sd: float
    coverage: float
    penalty_term: float
    fitness: float
    valid: bool


def default_eta(d: Dataset) -> float:
    lo = float(d.y.min())
    return lo - (float(d.y.max()) - lo) - 1.0


class RegionObjective:
    """Penalised, regularised fitness over parameter vectors for one dataset.

    ``evaluate_batch`` is the hot path used by the optimizer. The result for
    a candidate does not depend on which other candidates share its batch.
    """

    def __init__(self, d: Dataset, L: int, cfg: ObjectiveConfig,
                 plan: BootstrapPlan | None = None):
        self.d = d
        self.L = L
        self.p = d.p
        self.cfg = cfg
        self.eta = default_eta(d) if cfg.eta is None else float(cfg.eta)
        if not self.eta < d.y.min():
            raise ValueError(f"eta={self.eta} must be below min(y)={d.y.min()}")
        if cfg.gamma > 0 and plan is None:
            plan = BootstrapPlan(d, cfg.bootstrap)
        self.plan = plan
        self._axis = SortedAxis(d) if d.p == 1 else None

    @property
    def dim(self) -> int:
        return 2 * self.p * self.L

    def _stats(self, lo: np.ndarray, hi: np.ndarray):
        """Inside counts, inside sums and (B, L) position ranges for p = 1."""
        if self._axis is not None:
            start, end = self._axis.positions(lo[:, :, 0], hi[:, :, 0])
            counts = (end - start).sum(axis=1)
            sums = (self._axis.csum[end] - self._axis.csum[start]).sum(axis=1)
            return counts, sums, (start, end), None
        x = self.d.x
        masks = np.zeros((lo.shape[0], self.d.n), dtype=bool)
        for l in range(self.L):
            masks |= np.all((x >= lo[:, l, None, :]) & (x <= hi[:, l, None, :]), axis=2)
        counts = masks.sum(axis=1)
        sums = np.where(masks, self.d.y, 0.0).sum(axis=1)
        return counts, sums, None, masks

    def _sds(self, ranges, masks, rows: np.ndarray) -> np.ndarray:
        sds = np.full(rows.size, np.nan)
        if rows.size == 0:
            return sds
        if ranges is not None:
            return self.plan.sd_intervals(ranges[0][rows], ranges[1][rows])
        for i, b in enumerate(rows):
            try:
                sds[i] = self.plan.sd_mask(masks[b])
            except BootstrapError as exc:
                log.debug("bootstrap failed: %s", exc)
        return sds

    def breakdown_batch(self, V: np.ndarray) -> dict[str, np.ndarray]:
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if V.shape[1] != self.dim:
            raise ValueError(f"parameter vectors must have length {self.dim}, got {V.shape[1]}")
        lo, hi, valid = decode_batch(V, self.L, self.p)
        counts, sums, ranges, masks = self._stats(lo, hi)
        cover = counts / self.d.n
        usable = valid & (counts > 0)
        mean = np.full(V.shape[0], np.nan)
        mean[usable] = sums[usable] / counts[usable]
        sd = np.zeros(V.shape[0])
        if self.cfg.gamma > 0:
            rows = np.flatnonzero(usable)
            sd[rows] = self._sds(ranges, masks, rows)
            failed = usable & np.isnan(sd)
            if np.any(failed):
                log.info("%d candidate(s) scored eta after bootstrap failure", int(failed.sum()))
            usable &= ~failed
            sd[~usable] = 0.0
        penalty = self.cfg.c * np.maximum(self.cfg.beta - cover, 0.0)
        fitness = np.where(usable, mean - self.cfg.gamma * sd - penalty, self.eta)
        penalty[~usable] = 0.0
        return {"mean": mean, "sd": sd, "coverage": cover, "penalty": penalty,
                "fitness": fitness, "valid": usable}

    def evaluate_batch(self, V: np.ndarray) -> np.ndarray:
        return self.breakdown_batch(V)["fitness"]

    def breakdown(self, v) -> FitnessBreakdown:
        b = self.breakdown_batch(np.asarray(v, dtype=float)[None, :])
        mean = float(b["mean"][0])
        return FitnessBreakdown(
            raw_mean=None if np.isnan(mean) else mean,
            sd=float(b["sd"][0]),
            coverage=float(b["coverage"][0]),
            penalty_term=float(b["penalty"][0]),
            fitness=float(b["fitness"][0]),
            valid=bool(b["valid"][0]),
        )

    def __call__(self, v) -> float:
        return self.breakdown(v).fitness


def sentinel_objective(d: Dataset, v, cfg: ObjectiveConfig, L: int, p: int
                       ) -> tuple[float, FitnessBreakdown]:
    """Mean inside the decoded region, or eta for an unusable candidate.

    No penalty or regularisation is applied.
    """
    if p != d.p:
        raise ValueError(f"dimension mismatch: data has p={d.p}, got p={p}")
    bare = ObjectiveConfig(beta=cfg.beta, c=cfg.c, gamma=0.0, eta=cfg.eta,
                           bootstrap=cfg.bootstrap)
    b = RegionObjective(d, L, bare).breakdown(v)
    value = b.raw_mean if b.valid else b.fitness
    return value, b


def penalized_fitness(d: Dataset, v, cfg: ObjectiveConfig, L: int, p: int) -> FitnessBreakdown:
    if p != d.p:
        raise ValueError(f"dimension mismatch: data has p={d.p}, got p={p}")
    return RegionObjective(d, L, cfg).breakdown(v)
