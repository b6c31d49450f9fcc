"""NSGA-II on integer option genomes, plus the repeated-run comparison protocol."""
from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .metrics import classify_optima, mean_gap, performance_difference
from .objectives import Backend, EvaluationLedger
from .pareto import ParetoSet, extract_nondominated, nondominated_sort_with_crowding
from .space import DesignSpace, DesignVector, StartingBound, resolve_bound


class BudgetRefused(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 30
    tournament_size: int = 2
    crossover_prob: float = 0.5
    mutation_rate: float = 0.1
    budget: int = 1000
    seed: int = 0
    bound: StartingBound = StartingBound("low")
    count_mode: str = "unique"
    # converged: the last max_stall generations together added less than one population
    max_stall: int = 50
    # offspring rejection rounds before accepting a short generation
    max_mating_rounds: int = 20

    def __post_init__(self):
        for name in ("crossover_prob", "mutation_rate"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.count_mode not in ("unique", "raw"):
            raise ValueError(f"unknown count mode {self.count_mode!r}")


@dataclass
class Individual:
    genome: DesignVector
    objectives: tuple[float, ...]
    rank: int = 0
    crowding: float = 0.0


@dataclass(frozen=True)
class NsgaResult:
    seed: int
    final: ParetoSet
    raw_requests: int
    unique_evaluations: int
    generations: int


def mutate(genome, rate: float, rng: np.random.Generator, cardinalities) -> DesignVector:
    """Resample each gene, with probability ``rate``, to a different option of its variable."""
    out = list(genome)
    flips = (rng.random(len(out)) < rate).tolist()
    for k, flip in enumerate(flips):
        if not flip:
            continue
        m = cardinalities[k]
        if m < 2:
            continue
        new = int(rng.integers(m - 1))
        out[k] = new + 1 if new >= out[k] else new
    return tuple(int(g) for g in out)


def crossover_uniform(a, b, p: float, rng: np.random.Generator) -> tuple[DesignVector, DesignVector]:
    swap = (rng.random(len(a)) < p).tolist()
    c1 = tuple(int(y if s else x) for x, y, s in zip(a, b, swap))
    c2 = tuple(int(x if s else y) for x, y, s in zip(a, b, swap))
    return c1, c2


def _tournament(pop: list[Individual], rng: np.random.Generator, size: int) -> Individual:
    # distinct contestants, drawn one by one (cheaper than Generator.choice)
    picks: list[int] = []
    for _ in range(min(size, len(pop))):
        k = int(rng.integers(len(pop) - len(picks)))
        for p in sorted(picks):
            if k >= p:
                k += 1
        picks.append(k)
    best = pop[picks[0]]
    for k in picks[1:]:
        other = pop[int(k)]
        if other.rank < best.rank:
            best = other
        elif other.rank == best.rank:
            if other.crowding > best.crowding:
                best = other
            elif other.crowding == best.crowding and rng.random() < 0.5:
                best = other
    return best


def _assign(pop: list[Individual]) -> None:
    F = np.array([ind.objectives for ind in pop])
    _, rank, crowd = nondominated_sort_with_crowding(F)
    for ind, r, c in zip(pop, rank, crowd):
        ind.rank, ind.crowding = int(r), float(c)


def _survivors(pool: list[Individual], n: int) -> list[Individual]:
    F = np.array([ind.objectives for ind in pool])
    fronts, rank, crowd = nondominated_sort_with_crowding(F)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= n:
            chosen.extend(front)
            continue
        rest = sorted(front, key=lambda i: (-crowd[i], i))
        chosen.extend(rest[: n - len(chosen)])
        break
    out = [pool[i] for i in chosen]
    _assign(out)
    return out


def run_nsga2(space: DesignSpace, backend: Backend, ga: GaConfig, ledger: EvaluationLedger | None = None) -> NsgaResult:
    """Generational NSGA-II with (mu + lambda) survival; stops once the budget is spent.

    Offspring identical to any already-evaluated design are redrawn, so each
    generation spends its evaluations on new designs. The budget is checked at
    generation boundaries. Returns the first front of the final population.
    """
    if ga.budget < ga.population_size:
        raise BudgetRefused(f"budget {ga.budget} is smaller than one population ({ga.population_size})")
    ledger = ledger or EvaluationLedger(backend)
    rng = np.random.default_rng(ga.seed)
    ms = space.cardinalities
    n = ga.population_size
    target = min(n, space.size)

    genomes = [resolve_bound(space, ga.bound)]
    seen = set(genomes)
    attempts = 0
    while len(genomes) < target and attempts < 100 * n:
        g = tuple(int(rng.integers(m)) for m in ms)
        attempts += 1
        if g not in seen:
            seen.add(g)
            genomes.append(g)
    values = ledger.evaluate_many(genomes)
    pop = [Individual(g, y) for g, y in zip(genomes, values)]
    _assign(pop)

    generations = 0
    recent: deque[int] = deque(maxlen=ga.max_stall)
    while ledger.count(ga.count_mode) < ga.budget:
        if len(recent) == ga.max_stall and sum(recent) < n:
            break
        before = ledger.unique_evaluations
        current = {ind.genome for ind in pop}
        children: list[DesignVector] = []
        taken = set()
        rounds = 0
        while len(children) < n and rounds < ga.max_mating_rounds:
            rounds += 1
            p1 = _tournament(pop, rng, ga.tournament_size)
            p2 = _tournament(pop, rng, ga.tournament_size)
            for c in crossover_uniform(p1.genome, p2.genome, ga.crossover_prob, rng):
                c = mutate(c, ga.mutation_rate, rng, ms)
                # archive duplicate elimination: only never-evaluated designs are offspring
                if c in current or c in taken or c in ledger.memo or len(children) >= n:
                    continue
                taken.add(c)
                children.append(c)
        if children:
            values = ledger.evaluate_many(children)
            pool = pop + [Individual(c, y) for c, y in zip(children, values)]
            pop = _survivors(pool, n)
        generations += 1
        recent.append(ledger.unique_evaluations - before)

    final = extract_nondominated((ind.genome, ind.objectives) for ind in pop if ind.rank == 0)
    snap = ledger.snapshot()
    return NsgaResult(ga.seed, final, snap.raw_requests, snap.unique_evaluations, generations)


@dataclass(frozen=True)
class ProtocolResult:
    runs: tuple[NsgaResult, ...]
    kept: tuple[NsgaResult, ...]
    scores: tuple[tuple[int, float], ...]  # (global optima found, mean gap) per run


def _one_run(args):
    space, backend, ga = args
    return run_nsga2(space, backend, ga)


def repeated_run_protocol(
    space: DesignSpace,
    backend: Backend,
    ga: GaConfig,
    runs: int = 20,
    keep: int = 4,
    global_set: ParetoSet | None = None,
    jobs: int = 1,
) -> ProtocolResult:
    """Run ``runs`` seeds (``ga.seed + k``) and keep the ``keep`` best.

    Runs are ranked by global optima found, then by the smaller mean
    performance gap, then by seed. Without a global set the first seeds are kept.
    """
    if runs < keep:
        raise ValueError(f"runs ({runs}) must be >= keep ({keep})")
    configs = [replace(ga, seed=ga.seed + k) for k in range(runs)]
    tasks = [(space, backend, c) for c in configs]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_run, tasks))
    else:
        results = [_one_run(t) for t in tasks]

    scores = []
    for r in results:
        if global_set is None or not len(global_set) or not len(r.final):
            scores.append((0, 0.0))
            continue
        found, _ = classify_optima(r.final, global_set)
        gap = mean_gap(performance_difference(r.final, global_set, space))
        scores.append((len(found), gap))
    order = sorted(range(runs), key=lambda k: (-scores[k][0], scores[k][1], k))
    kept = tuple(results[k] for k in order[:keep])
    return ProtocolResult(tuple(results), kept, tuple(scores))
