"""Penalty schedule, regularisation grid, k-fold bias/variance and final fit.

For each penalty weight c in an increasing schedule the GA maximises the
penalised objective. Runs whose best region meets the coverage floor are
feasible. The smallest feasible c sets where the search may stop; among the
feasible runs the fit keeps the largest ``mean - gamma * sd``, breaking ties
toward the smaller c.

For each gamma on a grid, k-fold cross-validation fits on k - 1 folds and
records the mean response of the held-out fold inside the fitted region.
Bias is ``1 / mean(test means)`` and variance is their sample variance.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import ga
from .data import Dataset, domain_bounds, kfold
from .estimation import BootstrapConfig, BootstrapError, BootstrapPlan, coverage, estimate, saa_mean
from .objective import ObjectiveConfig, RegionObjective
from .region import RegionUnion, decode
from .seeding import derive_seed

log = logging.getLogger(__name__)

DEFAULT_PENALTY_FACTORS = (1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class PenaltySchedule:
    candidates: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.candidates)
        if not c:
            raise ValueError("penalty schedule must not be empty")
        if any(v <= 0 for v in c) or any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError("penalty schedule must be positive and strictly increasing")
        object.__setattr__(self, "candidates", c)

    @classmethod
    def default(cls, d: Dataset) -> "PenaltySchedule":
        """{1, 10, 100, 1000} x the response range (range 1 if y is constant)."""
        span = float(d.y.max() - d.y.min()) or 1.0
        return cls(tuple(f * span for f in DEFAULT_PENALTY_FACTORS))


@dataclass(frozen=True)
class GammaGrid:
    candidates: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in self.candidates)
        if not g or any(v < 0 for v in g):
            raise ValueError("gamma grid must be non-empty and non-negative")
        object.__setattr__(self, "candidates", g)


@dataclass
class Attempt:
    """Outcome of the GA at one penalty weight."""

    c: float
    fitness: float
    region: RegionUnion | None
    mean: float | None
    coverage: float
    sd: float
    feasible: bool
    run: ga.GARun


@dataclass
class FitResult:
    region: RegionUnion | None
    train_mean: float | None
    train_coverage: float
    train_sd: float
    chosen_c: float
    feasible: bool
    beta: float
    gamma: float
    ga_run: ga.GARun
    attempts: list[Attempt] = field(default_factory=list)

    @property
    def objective(self) -> float | None:
        if self.train_mean is None:
            return None
        return self.train_mean - self.gamma * self.train_sd


@dataclass
class CVReport:
    gamma: float
    fold_test_means: list[float | None]
    bias: float | None
    variance: float | None
    n_empty: int = 0
    fold_regions: list[RegionUnion | None] = field(default_factory=list)
    error: str | None = None


def _attempt(d: Dataset, L: int, obj_cfg: ObjectiveConfig, plan, ga_cfg: ga.GAConfig,
             restarts: int, workers: int, seed_labels: tuple) -> Attempt:
    objective = RegionObjective(d, L, obj_cfg, plan)
    bounds = domain_bounds(d)
    best = None
    for r in range(restarts):
        cfg = replace(ga_cfg, seed=derive_seed(ga_cfg.seed, *seed_labels, r))
        result = ga.run(objective.evaluate_batch, bounds, L, d.p, cfg,
                        vectorized=True, workers=workers)
        if best is None or result.best_fitness > best.best_fitness:
            best = result
    region = decode(best.best_vector, L, d.p)
    if region is None:
        return Attempt(obj_cfg.c, best.best_fitness, None, None, 0.0, 0.0, False, best)
    est = estimate(d, region)
    sd = 0.0
    if obj_cfg.gamma > 0 and est.inside_count > 0:
        try:
            sd = plan.sd(region)
        except BootstrapError:
            sd = float("nan")
    feasible = est.mean is not None and est.coverage >= obj_cfg.beta and not np.isnan(sd)
    return Attempt(obj_cfg.c, best.best_fitness, region, est.mean, est.coverage, sd, feasible, best)


def fit(d_train: Dataset, L: int, beta: float, gamma: float,
        schedule: PenaltySchedule | None = None, ga_cfg: ga.GAConfig = ga.GAConfig(),
        bootstrap_cfg: BootstrapConfig = BootstrapConfig(), *, eta: float | None = None,
        restarts: int = 1, workers: int = 1) -> FitResult:
    """Fit one envelope at fixed ``gamma``, sweeping the penalty schedule.

    Each schedule entry runs the GA ``restarts`` times from derived seeds and
    keeps the best run. If no entry is feasible the result is flagged and
    carries the attempt with the largest coverage.
    """
    if d_train.n < 2:
        raise ValueError("fit needs at least 2 samples")
    if schedule is None:
        schedule = PenaltySchedule.default(d_train)
    base = ObjectiveConfig(beta=beta, c=schedule.candidates[0], gamma=gamma, eta=eta,
                           bootstrap=bootstrap_cfg)
    plan = BootstrapPlan(d_train, bootstrap_cfg) if gamma > 0 else None
    attempts = [
        _attempt(d_train, L, replace(base, c=c), plan, ga_cfg, restarts, workers, ("fit", t))
        for t, c in enumerate(schedule.candidates)
    ]
    feasible = [a for a in attempts if a.feasible]
    if feasible:
        # max() keeps the first maximum, i.e. the smallest c
        chosen = max(feasible, key=lambda a: a.mean - gamma * a.sd)
    else:
        chosen = max(attempts, key=lambda a: (a.coverage, a.fitness))
        log.warning("no penalty weight gave coverage >= %g (best %.4f)", beta, chosen.coverage)
    return FitResult(
        region=chosen.region, train_mean=chosen.mean, train_coverage=chosen.coverage,
        train_sd=chosen.sd, chosen_c=chosen.c, feasible=bool(feasible), beta=beta,
        gamma=gamma, ga_run=chosen.run, attempts=attempts,
    )


def evaluate(d_test: Dataset, r: RegionUnion | None) -> tuple[float | None, float]:
    """Held-out mean (``None`` if empty) and coverage of a fitted region."""
    if r is None:
        return None, 0.0
    return saa_mean(d_test, r), coverage(d_test, r)


def map_jobs(fn: Callable, jobs: Sequence, workers: int | None) -> list:
    """Ordered map over independent jobs, in worker processes when workers > 1."""
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def _cv_job(job):
    (train, test, L, beta, gamma, schedule, ga_cfg, boot_cfg, eta, restarts) = job
    result = fit(train, L, beta, gamma, schedule, ga_cfg, boot_cfg, eta=eta, restarts=restarts)
    test_mean, _ = evaluate(test, result.region)
    return result.region, test_mean


def summarize_folds(gamma: float, test_means: list[float | None],
                    regions: list[RegionUnion | None] | None = None) -> CVReport:
    values = [m for m in test_means if m is not None]
    n_empty = len(test_means) - len(values)
    if n_empty:
        log.warning("gamma=%g: %d held-out fold(s) had no sample in the region", gamma, n_empty)
    report = CVReport(gamma, list(test_means), None, None, n_empty, list(regions or []))
    if not values:
        report.error = "every held-out fold was empty inside its fitted region"
        return report
    avg = float(np.mean(values))
    report.bias = 1.0 / avg if avg > 0 else None
    report.variance = float(np.var(values, ddof=1)) if len(values) > 1 else None
    return report


def cross_validate(d: Dataset, L: int, beta: float, grid: GammaGrid, k: int,
                   schedule: PenaltySchedule | None = None, ga_cfg: ga.GAConfig = ga.GAConfig(),
                   bootstrap_cfg: BootstrapConfig = BootstrapConfig(), seed: int = 0, *,
                   eta: float | None = None, restarts: int = 1,
                   workers: int | None = 1) -> list[CVReport]:
    """k-fold bias/variance estimates for every gamma on ``grid``.

    Fold f uses GA and bootstrap seeds derived from ``seed`` and f, shared
    across gamma values so that curves over gamma compare like with like.
    """
    folds = kfold(d, k, derive_seed(seed, "model_selection", "kfold"))
    if schedule is None:
        schedule = PenaltySchedule.default(d)
    jobs = []
    for gamma in grid.candidates:
        for f in range(k):
            train_idx, test_idx = folds.fold(f)
            fold_ga = replace(ga_cfg, seed=derive_seed(seed, "model_selection", "ga", f))
            fold_boot = replace(bootstrap_cfg,
                                seed=derive_seed(seed, "model_selection", "bootstrap", f))
            jobs.append((d.subset(train_idx), d.subset(test_idx), L, beta, gamma, schedule,
                         fold_ga, fold_boot, eta, restarts))
    results = map_jobs(_cv_job, jobs, workers)
    reports = []
    for i, gamma in enumerate(grid.candidates):
        chunk = results[i * k:(i + 1) * k]
        reports.append(summarize_folds(gamma, [m for _, m in chunk], [r for r, _ in chunk]))
    return reports


SELECTION_POLICIES = ("default", "min-variance", "knee", "manual")


def select_gamma(reports: Iterable[CVReport], policy: str = "default",
                 manual: float | None = None, tol: float = 1e-12) -> float:
    """Pick gamma from CV reports.

    ``default``: smallest gamma whose variance is within ``tol`` of the
    minimum. ``min-variance``: first gamma attaining the exact minimum.
    ``knee``: gamma after the largest variance drop per unit gamma.
    ``manual``: ``manual``, which must be on the grid.
    """
    reports = sorted(reports, key=lambda r: r.gamma)
    if not reports:
        raise ValueError("no CV reports to select from")
    if policy == "manual":
        if manual is None or all(r.gamma != manual for r in reports):
            raise ValueError(f"manual gamma {manual} is not on the grid")
        return float(manual)
    if len(reports) == 1:
        return reports[0].gamma
    usable = [r for r in reports if r.variance is not None]
    if not usable:
        raise ValueError("no gamma has a defined variance")
    if policy == "default":
        vmin = min(r.variance for r in usable)
        return next(r.gamma for r in usable if r.variance <= vmin + tol)
    if policy == "min-variance":
        return min(usable, key=lambda r: r.variance).gamma
    if policy == "knee":
        if len(usable) == 1:
            return usable[0].gamma
        drops = [(a.variance - b.variance) / (b.gamma - a.gamma) for a, b in zip(usable, usable[1:])]
        return usable[int(np.argmax(drops)) + 1].gamma
    raise ValueError(f"unknown selection policy {policy!r}; choose from {SELECTION_POLICIES}")
