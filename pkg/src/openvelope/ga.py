"""Real-coded genetic algorithm over box parameter vectors.

Operators:

* selection: binary tournament (rank-based, so negative sentinel fitness is
  harmless); ties go to the first drawn contender.
* crossover: uniform coordinate exchange between the two parents.
* mutation: per-coordinate Gaussian noise scaled to the domain width, then
  clamped to the domain.
* survival: the ``elitism_count`` best individuals are copied unchanged, and
  keep their fitness without re-evaluation.

Fitness is evaluated in fixed blocks of ``BLOCK_SIZE`` candidates. Workers
only change who evaluates a block, never how the population is split, so a
run is identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import DomainBounds

BLOCK_SIZE = 32


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 100
    max_generations: int = 200
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    mutation_scale: float = 0.1
    elitism_count: int = 2
    stall_generations: int = 30
    stall_tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if not 1 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [1, population_size)")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.mutation_scale < 0 or self.max_generations < 0 or self.stall_generations < 1:
            raise ValueError("invalid GA budget or mutation scale")


@dataclass
class GARun:
    best_vector: np.ndarray
    best_fitness: float
    history: list[float]
    generations_used: int


def coordinate_bounds(bounds: DomainBounds, L: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper limits per coordinate of the (L, p, 2) vector layout."""
    if len(bounds.lower) != p:
        raise ValueError(f"bounds have {len(bounds.lower)} dimensions, expected {p}")
    lo = np.tile(np.repeat(np.asarray(bounds.lower, dtype=float), 2), L)
    hi = np.tile(np.repeat(np.asarray(bounds.upper, dtype=float), 2), L)
    return lo, hi


def initialize(bounds: DomainBounds, L: int, p: int, cfg: GAConfig,
               rng: np.random.Generator | None = None) -> np.ndarray:
    """W vectors with each (low, high) pair drawn uniformly in the domain and sorted."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    lo, hi = coordinate_bounds(bounds, L, p)
    pop = lo + rng.random((cfg.population_size, lo.size)) * (hi - lo)
    pairs = pop.reshape(cfg.population_size, L, p, 2)
    pairs.sort(axis=3)
    return pairs.reshape(cfg.population_size, -1)


def select(population: np.ndarray, fitnesses: np.ndarray, cfg: GAConfig,
           rng: np.random.Generator, n_pairs: int) -> np.ndarray:
    """Indices of ``n_pairs`` parent pairs, each parent a binary-tournament winner."""
    f = np.asarray(fitnesses, dtype=float)
    contenders = rng.integers(0, len(population), size=(2 * n_pairs, 2))
    first, second = contenders[:, 0], contenders[:, 1]
    winners = np.where(f[second] > f[first], second, first)
    return winners.reshape(n_pairs, 2)


def crossover(parent_a: np.ndarray, parent_b: np.ndarray, cfg: GAConfig,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform exchange. Accepts single vectors or stacked (k, dim) pairs."""
    a = np.atleast_2d(np.asarray(parent_a, dtype=float))
    b = np.atleast_2d(np.asarray(parent_b, dtype=float))
    do = rng.random(a.shape[0]) < cfg.crossover_prob
    swap = (rng.random(a.shape) < 0.5) & do[:, None]
    ca = np.where(swap, b, a)
    cb = np.where(swap, a, b)
    if np.ndim(parent_a) == 1:
        return ca[0], cb[0]
    return ca, cb


def mutate(individual: np.ndarray, bounds: DomainBounds, cfg: GAConfig,
           rng: np.random.Generator, L: int = 1, p: int | None = None) -> np.ndarray:
    """Gaussian perturbation of each coordinate with probability ``mutation_prob``."""
    x = np.atleast_2d(np.asarray(individual, dtype=float))
    p = len(bounds.lower) if p is None else p
    lo, hi = coordinate_bounds(bounds, x.shape[1] // (2 * p), p)
    hit = rng.random(x.shape) < cfg.mutation_prob
    noise = rng.standard_normal(x.shape) * (cfg.mutation_scale * (hi - lo))
    out = np.clip(np.where(hit, x + noise, x), lo, hi)
    return out[0] if np.ndim(individual) == 1 else out


def _evaluate(fitness: Callable, pop: np.ndarray, vectorized: bool,
              pool: ThreadPoolExecutor | None) -> np.ndarray:
    blocks = [pop[i:i + BLOCK_SIZE] for i in range(0, len(pop), BLOCK_SIZE)]

    def one(block):
        if vectorized:
            return np.asarray(fitness(block), dtype=float).reshape(-1)
        return np.array([float(fitness(v)) for v in block])

    parts = list(pool.map(one, blocks)) if pool is not None else [one(b) for b in blocks]
    return np.concatenate(parts) if parts else np.empty(0)


def run(fitness: Callable, bounds: DomainBounds, L: int, p: int, cfg: GAConfig, *,
        vectorized: bool = False, workers: int = 1) -> GARun:
    """Maximise ``fitness`` over 2pL-vectors inside ``bounds``.

    ``fitness`` maps one vector to a float, or with ``vectorized=True`` a
    (k, 2pL) array to k floats. It must never raise; invalid candidates
    should score a sentinel.

    Stops after ``max_generations`` or once the best fitness has improved by
    less than ``stall_tolerance`` over the last ``stall_generations``
    generations.
    """
    rng = np.random.default_rng(cfg.seed)
    W, E = cfg.population_size, cfg.elitism_count
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        pop = initialize(bounds, L, p, cfg, rng)
        fit = _evaluate(fitness, pop, vectorized, pool)
        history = [float(fit.max())]
        generation = 0
        while generation < cfg.max_generations:
            if (len(history) > cfg.stall_generations
                    and history[-1] - history[-1 - cfg.stall_generations] < cfg.stall_tolerance):
                break
            order = np.argsort(-fit, kind="stable")
            elite = order[:E]
            n_off = W - E
            pairs = select(pop, fit, cfg, rng, (n_off + 1) // 2)
            ca, cb = crossover(pop[pairs[:, 0]], pop[pairs[:, 1]], cfg, rng)
            children = np.empty((2 * len(pairs), pop.shape[1]))
            children[0::2] = ca
            children[1::2] = cb
            children = mutate(children[:n_off], bounds, cfg, rng, L, p)
            child_fit = _evaluate(fitness, children, vectorized, pool)
            pop = np.vstack([pop[elite], children])
            fit = np.concatenate([fit[elite], child_fit])
            generation += 1
            history.append(float(fit.max()))
    finally:
        if pool is not None:
            pool.shutdown()
    best = int(np.argmax(fit))
    return GARun(pop[best].copy(), float(fit[best]), history, generation)
