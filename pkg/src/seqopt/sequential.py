"""Staged exhaustive search with Pareto carry-forward (initial and iterative runs).

Each stage enumerates every option combination of its variable group for each
solution carried from the previous stage. Variables of later stages stay at the
baseline, and only the stage's non-dominated candidates move on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .objectives import EvaluationLedger
from .pareto import ParetoSet, extract_nondominated
from .space import (
    DesignSpace,
    DesignVector,
    GroupingScheme,
    StartingBound,
    resolve_bound,
    stage_size,
)

DEFAULT_BUDGET_CAP = 20_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"full factorial needs {required} evaluations, cap is {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class SequentialConfig:
    space: DesignSpace
    grouping: GroupingScheme
    bound: StartingBound
    iterative_depth: int = 1

    def __post_init__(self):
        self.grouping.check(self.space)
        if self.iterative_depth < 0:
            raise ValueError("iterative_depth must be >= 0")


@dataclass(frozen=True)
class StageResult:
    stage: int
    group: tuple[str, ...]
    generated_count: int
    pareto: ParetoSet


@dataclass(frozen=True)
class PassTrace:
    """One full sweep through every stage from a single starting vector."""

    start: DesignVector
    stages: tuple[StageResult, ...]

    @property
    def final(self) -> ParetoSet:
        return self.stages[-1].pareto

    @property
    def generated_count(self) -> int:
        return sum(s.generated_count for s in self.stages)


@dataclass(frozen=True)
class RunTrace:
    kind: str  # "initial" or "iterative"
    passes: tuple[PassTrace, ...]
    final: ParetoSet
    raw_requests: int  # cumulative ledger counts at the end of the run
    unique_evaluations: int
    generated_count: int  # candidates generated by this run's passes only

    def count(self, mode: str = "unique") -> int:
        if mode == "unique":
            return self.unique_evaluations
        if mode == "raw":
            return self.raw_requests
        raise ValueError(f"unknown count mode {mode!r}")


def run_stage(
    space: DesignSpace,
    prev: ParetoSet | None,
    group: Sequence[str],
    baseline: Sequence[int],
    ledger: EvaluationLedger,
    stage: int = 1,
) -> StageResult:
    """Run one exhaustive stage over ``group``.

    With ``prev`` None the stage starts from ``baseline`` alone; otherwise from
    each carried solution, which already holds the baseline on later stages.
    """
    if prev is None:
        carried = [tuple(baseline)]
    else:
        assert len(prev) > 0, "cannot continue from an empty Pareto set"
        carried = list(prev.vectors)
    positions = [space.position(n) for n in group]
    ranges = [range(space.variables[p].n_options) for p in positions]
    candidates = []
    for base in carried:
        for combo in itertools.product(*ranges):
            v = list(base)
            for p, i in zip(positions, combo):
                v[p] = i
            candidates.append(tuple(v))
    values = ledger.evaluate_many(candidates)
    pareto = extract_nondominated(zip(candidates, values))
    expected = len(carried) * stage_size(space, group)
    assert len(candidates) == expected
    return StageResult(stage, tuple(group), len(candidates), pareto)


def sequential_pass(
    space: DesignSpace, grouping: GroupingScheme, start: Sequence[int], ledger: EvaluationLedger
) -> PassTrace:
    stages = []
    prev = None
    for z, group in enumerate(grouping.stages, 1):
        result = run_stage(space, prev, group, start, ledger, stage=z)
        stages.append(result)
        prev = result.pareto
    return PassTrace(tuple(start), tuple(stages))


def run_initial(config: SequentialConfig, ledger: EvaluationLedger) -> RunTrace:
    start = resolve_bound(config.space, config.bound)
    p = sequential_pass(config.space, config.grouping, start, ledger)
    snap = ledger.snapshot()
    return RunTrace("initial", (p,), p.final, snap.raw_requests, snap.unique_evaluations, p.generated_count)


def run_iterative(initial: RunTrace, config: SequentialConfig, ledger: EvaluationLedger) -> RunTrace:
    """Restart a sequential pass from every solution of the initial final set.

    The final set is extracted from all pass results pooled with the initial
    final set. Each further depth level restarts from final-set members not yet
    used as a start.
    """
    pool = dict(initial.final.entries)
    current = initial.final
    used: set[DesignVector] = set()
    passes = []
    for _ in range(config.iterative_depth):
        starts = [s for s in current.vectors if s not in used]
        if not starts:
            break
        for s in starts:
            used.add(s)
            p = sequential_pass(config.space, config.grouping, s, ledger)
            passes.append(p)
            pool.update(p.final.entries)
        current = extract_nondominated(pool.items())
    snap = ledger.snapshot()
    generated = sum(p.generated_count for p in passes)
    return RunTrace("iterative", tuple(passes), current, snap.raw_requests, snap.unique_evaluations, generated)


def run_sequential(config: SequentialConfig, ledger: EvaluationLedger) -> tuple[RunTrace, RunTrace | None]:
    """Initial run followed by the iterative run (None when iterative_depth is 0)."""
    initial = run_initial(config, ledger)
    if config.iterative_depth == 0:
        return initial, None
    return initial, run_iterative(initial, config, ledger)


def run_full_factorial(
    space: DesignSpace,
    ledger: EvaluationLedger,
    budget_cap: int = DEFAULT_BUDGET_CAP,
    chunk: int = 200_000,
) -> ParetoSet:
    """Evaluate every vector of ``space`` and return the global Pareto set."""
    if space.size > budget_cap:
        raise BudgetExceeded(space.size, budget_cap)
    front = ParetoSet.empty()
    it = space.all_vectors()
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        values = ledger.evaluate_many(block)
        front = extract_nondominated(itertools.chain(front.entries, zip(block, values)))
    return front
