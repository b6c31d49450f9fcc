"""Effectiveness, computational load and performance difference against a global set."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .pareto import ParetoSet
from .space import DesignSpace, DesignVector, encode_normalized


def classify_optima(search: ParetoSet, global_set: ParetoSet) -> tuple[list[DesignVector], list[DesignVector]]:
    """Split search solutions into (global optima found, search-only optima) by vector identity."""
    if len(search) and len(global_set):
        if len(search.vectors[0]) != len(global_set.vectors[0]):
            raise ValueError("search and global sets come from different spaces")
        if len(search.entries[0][1]) != len(global_set.entries[0][1]):
            raise ValueError("search and global sets have different objective arity")
    gset = global_set.vector_set()
    found = [v for v in search.vectors if v in gset]
    only = [v for v in search.vectors if v not in gset]
    return found, only


def effectiveness(n_found: int, n_total: int) -> float:
    if n_total <= 0:
        raise ValueError("global set is empty; effectiveness undefined")
    if not 0 <= n_found <= n_total:
        raise ValueError(f"found count {n_found} outside [0, {n_total}]")
    return n_found / n_total


def computational_load(n_eval_search: int, n_eval_full: int) -> float:
    if n_eval_full <= 0:
        raise ValueError("full-factorial evaluation count must be positive")
    if n_eval_search < 0:
        raise ValueError("evaluation count must be non-negative")
    return n_eval_search / n_eval_full


def computational_savings(n_eval_search: int, n_eval_full: int) -> float:
    return 1.0 - computational_load(n_eval_search, n_eval_full)


def percent(x: float, digits: int = 1) -> float:
    """Fraction -> percentage rounded half-up, the way report tables print it."""
    q = Decimal(1).scaleb(-digits)
    return float((Decimal(repr(x)) * 100).quantize(q, rounding=ROUND_HALF_UP))


@dataclass
class SolutionDifference:
    search: DesignVector
    matched: DesignVector
    distance: float
    absolute: list[float]
    percentage: list[float | None]


def _encode_all(space: DesignSpace, vectors) -> np.ndarray:
    idx = np.asarray(vectors, dtype=float)
    span = np.array([max(m - 1, 1) for m in space.cardinalities], dtype=float)
    return idx / span


def nearest_global(space: DesignSpace, v, global_set: ParetoSet, encoded: np.ndarray | None = None) -> tuple[int, float]:
    """Index into ``global_set`` of the nearest solution in normalized variable space."""
    G = encoded if encoded is not None else _encode_all(space, global_set.vectors)
    d = np.sqrt(((G - encode_normalized(space, v)) ** 2).sum(axis=1))
    k = int(np.argmin(d))  # first minimum = lexicographically smallest vector
    return k, float(d[k])


def performance_difference(search: ParetoSet, global_set: ParetoSet, space: DesignSpace) -> list[SolutionDifference]:
    if not len(search) or not len(global_set):
        raise ValueError("performance difference needs non-empty search and global sets")
    G = _encode_all(space, global_set.vectors)
    out = []
    for v, fs in search:
        k, dist = nearest_global(space, v, global_set, G)
        g, fg = global_set.entries[k]
        absolute = [a - b for a, b in zip(fs, fg)]
        pct = [None if b == 0 else 100.0 * (a - b) / b for a, b in zip(fs, fg)]
        out.append(SolutionDifference(v, g, dist, absolute, pct))
    return out


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def summarize_differences(diffs: list[SolutionDifference], n_obj: int) -> dict:
    return {
        "mean_absolute": [_mean([d.absolute[k] for d in diffs]) for k in range(n_obj)],
        "mean_percentage": [_mean([d.percentage[k] for d in diffs]) for k in range(n_obj)],
        "mean_abs_percentage": [
            _mean([None if d.percentage[k] is None else abs(d.percentage[k]) for d in diffs])
            for k in range(n_obj)
        ],
    }


def mean_gap(diffs: list[SolutionDifference]) -> float:
    """One scalar: mean |percentage| over solutions and objectives (absolute when undefined)."""
    vals = []
    for d in diffs:
        for a, p in zip(d.absolute, d.percentage):
            vals.append(abs(a) if p is None else abs(p))
    return sum(vals) / len(vals) if vals else 0.0


@dataclass
class MetricsReport:
    n_search: int
    n_global_found: int
    n_search_only: int
    n_global_total: int | None
    effectiveness: float | None
    precision: float | None
    raw_requests: int
    unique_evaluations: int
    count_mode: str
    full_factorial_count: int
    computational_load: float
    computational_savings: float
    differences: list[SolutionDifference] = field(default_factory=list)
    mean_differences: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("differences")
        return d


def compute_metrics(
    search: ParetoSet,
    global_set: ParetoSet | None,
    space: DesignSpace,
    raw_requests: int,
    unique_evaluations: int,
    count_mode: str = "unique",
) -> MetricsReport:
    n_eval = unique_evaluations if count_mode == "unique" else raw_requests
    load = computational_load(n_eval, space.size)
    if global_set is None or not len(global_set):
        return MetricsReport(
            len(search), 0, len(search), None, None, None, raw_requests, unique_evaluations,
            count_mode, space.size, load, 1.0 - load,
        )
    found, only = classify_optima(search, global_set)
    diffs = performance_difference(search, global_set, space) if len(search) else []
    n_obj = len(global_set.entries[0][1])
    return MetricsReport(
        n_search=len(search),
        n_global_found=len(found),
        n_search_only=len(only),
        n_global_total=len(global_set),
        effectiveness=effectiveness(len(found), len(global_set)),
        precision=len(found) / len(search) if len(search) else None,
        raw_requests=raw_requests,
        unique_evaluations=unique_evaluations,
        count_mode=count_mode,
        full_factorial_count=space.size,
        computational_load=load,
        computational_savings=1.0 - load,
        differences=diffs,
        mean_differences=summarize_differences(diffs, n_obj),
    )

