"""
Real-coded genetic algorithm used to locate a starting point for BFGS.

Chromosomes are packed interior displacement vectors. The initial population
is smoothed by a Chebyshev filter; offspring come from intermediate
recombination; parents and survivors are drawn by linear ranking.

All randomness flows through one ``numpy.random.Generator`` in a fixed order,
so a seed reproduces a run bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chebyshev import FilterPair
from .objective import unpack, pack


class SizeMismatch(ValueError):
    pass


class EvaluationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class GaConfig:
    population: int = 60
    generations: int = 800
    gene_range: tuple = (-0.1, 0.1)
    sparse_order: int = 6
    alpha_range: tuple = (-0.25, 1.25)
    mutations_per_generation: int = 1
    elitism: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if not self.gene_range[0] < self.gene_range[1]:
            raise ValueError("gene_range must satisfy lo < hi")
        if self.generations < 0 or self.mutations_per_generation < 0:
            raise ValueError("counts must be non-negative")
        if not 0 <= self.elitism <= self.population:
            raise ValueError("elitism must lie in [0, population]")


@dataclass
class Chromosome:
    genes: np.ndarray
    fitness: float = np.nan
    valid: bool = False

    def copy(self) -> "Chromosome":
        return Chromosome(self.genes.copy(), self.fitness, self.valid)


@dataclass
class GaResult:
    best: Chromosome
    trace: list
    population: list = field(default_factory=list)
    initial_best: Optional[Chromosome] = None


def evaluate(population, problem) -> list:
    """Fill in fitness for every invalid chromosome with one batched call."""
    stale = [c for c in population if not c.valid]
    if stale:
        genes = np.stack([c.genes for c in stale])
        try:
            values = np.atleast_1d(problem.energy(genes))
        except FloatingPointError as exc:
            raise EvaluationFailure(str(exc)) from exc
        if values.shape != (len(stale),):
            raise EvaluationFailure(f"objective returned shape {values.shape}")
        for c, v in zip(stale, values):
            c.fitness = float(v) if np.isfinite(v) else np.inf
            c.valid = True
    return population


def smooth(genes: np.ndarray, filt: FilterPair, problem) -> np.ndarray:
    """Embed packed genes into the clamped grid, filter, re-clamp and repack."""
    grid = unpack(genes, problem.dom)
    if problem.dims == 1:
        grid.u1 = filt.apply(grid.u1)
        grid.u1[..., 0] = grid.u1[..., -1] = 0.0
    else:
        for name in ("u1", "u2"):
            u = filt.apply(getattr(grid, name), dims=2)
            u[..., 0, :] = u[..., -1, :] = 0.0
            u[..., :, 0] = u[..., :, -1] = 0.0
            setattr(grid, name, u)
    return pack(grid)


def init_population(cfg: GaConfig, filt: FilterPair, problem, rng: np.random.Generator) -> list:
    if filt.n_fine != problem.dom.order + 1:
        raise SizeMismatch(
            f"filter built for {filt.n_fine} nodes, grid has {problem.dom.order + 1}"
        )
    lo, hi = cfg.gene_range
    raw = rng.uniform(lo, hi, size=(cfg.population, problem.n_unknowns))
    genes = smooth(raw, filt, problem)
    pop = [Chromosome(g) for g in genes]
    return evaluate(pop, problem)


def crossover(x1, x2, rng: np.random.Generator, alpha_range=(-0.25, 1.25), alpha=None) -> np.ndarray:
    """Intermediate recombination o = x1*alpha + x2*(1 - alpha), alpha drawn per gene."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise SizeMismatch(f"parent shapes differ: {x1.shape} vs {x2.shape}")
    if alpha is None:
        alpha = rng.uniform(alpha_range[0], alpha_range[1], size=x1.shape)
    return x1 * alpha + x2 * (1.0 - alpha)


def mutate(population: list, cfg: GaConfig, rng: np.random.Generator) -> list:
    """
    Replace one random gene in each of ``cfg.mutations_per_generation``
    distinct chromosomes by a fresh uniform draw from the gene range.
    """
    out = list(population)
    k = min(cfg.mutations_per_generation, len(out))
    if k == 0:
        return out
    picks = rng.choice(len(out), size=k, replace=False)
    lo, hi = cfg.gene_range
    for idx in picks:
        c = out[idx].copy()
        gene = rng.integers(c.genes.size)
        c.genes[gene] = rng.uniform(lo, hi)
        c.fitness, c.valid = np.nan, False
        out[idx] = c
    return out


def rank_probabilities(m: int) -> np.ndarray:
    """
    Linear-ranking probabilities 2i/(m(m+1)) for ranks i = 1..m.

    Rank 1 is the worst chromosome (largest energy), rank m the best.
    """
    if m < 1:
        raise ValueError("need at least one chromosome")
    i = np.arange(1, m + 1, dtype=float)
    return 2.0 * i / (m * (m + 1))


def rank_order(population: list) -> np.ndarray:
    """Indices sorted worst first; ties broken by position for determinism."""
    fit = np.array([c.fitness for c in population])
    return np.argsort(-fit, kind="stable")


def select(population: list, count: int, rng: np.random.Generator, replace_: bool = True) -> np.ndarray:
    order = rank_order(population)
    probs = rank_probabilities(len(population))
    picks = rng.choice(len(population), size=count, replace=replace_, p=probs)
    return order[picks]


def best_of(population: list) -> Chromosome:
    return min(population, key=lambda c: c.fitness)


def evolve(problem, cfg: GaConfig, filt: FilterPair,
           rng: Optional[np.random.Generator] = None, initial: Optional[list] = None) -> GaResult:
    """
    Run ``cfg.generations`` generations and return the best chromosome ever seen.

    Each generation: rank-select ``population`` parent pairs, recombine them
    into as many offspring, mutate, then keep the ``elitism`` best of parents
    plus offspring and fill the rest by rank selection without replacement.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    pop = initial if initial is not None else init_population(cfg, filt, problem, rng)
    evaluate(pop, problem)
    best = best_of(pop).copy()
    initial_best = best.copy()
    trace = [best.fitness]
    m = cfg.population

    for _ in range(cfg.generations):
        parents = select(pop, 2 * m, rng)
        children = [
            Chromosome(crossover(pop[parents[2 * k]].genes, pop[parents[2 * k + 1]].genes,
                                 rng, cfg.alpha_range))
            for k in range(m)
        ]
        children = mutate(children, cfg, rng)
        evaluate(children, problem)

        pool = pop + children
        order = np.argsort([c.fitness for c in pool], kind="stable")
        elites = [pool[i] for i in order[:cfg.elitism]]
        rest = [pool[i] for i in order[cfg.elitism:]]
        fill = select(rest, m - len(elites), rng, replace_=False)
        pop = elites + [rest[i] for i in fill]

        gen_best = best_of(pop)
        if gen_best.fitness < best.fitness:
            best = gen_best.copy()
        trace.append(gen_best.fitness)

    return GaResult(best=best, trace=trace, population=pop, initial_best=initial_best)
