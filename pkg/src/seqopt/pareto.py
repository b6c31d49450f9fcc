"""Pareto dominance, non-dominated extraction, ranking and crowding (minimization)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .space import DesignVector


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    if len(a) != len(b):
        raise ValueError(f"objective arity mismatch: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


@dataclass(frozen=True)
class ParetoSet:
    """Mutually non-dominated (vector, objectives) pairs, sorted by vector."""

    entries: tuple[tuple[DesignVector, tuple[float, ...]], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[DesignVector, tuple[float, ...]]]:
        return iter(self.entries)

    def __contains__(self, v) -> bool:
        return tuple(v) in self.as_dict()

    @property
    def vectors(self) -> tuple[DesignVector, ...]:
        return tuple(v for v, _ in self.entries)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([y for _, y in self.entries], dtype=float)

    def vector_set(self) -> frozenset:
        return frozenset(self.vectors)

    def as_dict(self) -> dict:
        return dict(self.entries)

    @classmethod
    def empty(cls) -> "ParetoSet":
        return cls(())


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """Boolean mask of rows of ``F`` not dominated by any other row."""
    F = np.asarray(F, dtype=float)
    n = len(F)
    if n == 0:
        return np.zeros(0, dtype=bool)
    if F.ndim != 2:
        raise ValueError("objectives must be a 2-D array")
    m = F.shape[1]
    if m == 1:
        return F[:, 0] == F[:, 0].min()
    if m == 2:
        return _mask_2d(F[:, 0], F[:, 1])
    return _mask_sweep(F)


def _mask_2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = np.lexsort((b, a))
    a_s, b_s = a[order], b[order]
    new = np.r_[True, a_s[1:] != a_s[:-1]]
    starts = np.flatnonzero(new)
    gid = np.cumsum(new) - 1
    group_min = b_s[starts]
    running = np.minimum.accumulate(b_s)
    prev_min = np.r_[np.inf, running[starts[1:] - 1]]
    dominated = (prev_min[gid] <= b_s) | (group_min[gid] < b_s)
    mask = np.empty(len(a), dtype=bool)
    mask[order] = ~dominated
    return mask


def _mask_sweep(F: np.ndarray) -> np.ndarray:
    # In lexicographic order a dominator always precedes what it dominates, and
    # anything dominated by a dominated point is dominated by a front member.
    order = np.lexsort(F.T[::-1])
    front: list[int] = []
    mask = np.zeros(len(F), dtype=bool)
    for i in order:
        p = F[i]
        if front:
            Q = F[front]
            if np.any(np.all(Q <= p, axis=1) & np.any(Q < p, axis=1)):
                continue
        front.append(i)
        mask[i] = True
    return mask


def extract_nondominated(candidates: Iterable[tuple[Sequence[int], Sequence[float]]]) -> ParetoSet:
    """Keep exactly the non-dominated candidates; repeated vectors are collapsed."""
    unique: dict[DesignVector, tuple[float, ...]] = {}
    for v, y in candidates:
        v = tuple(int(i) for i in v)
        if v not in unique:
            unique[v] = tuple(float(x) for x in y)
    if not unique:
        return ParetoSet.empty()
    vecs = list(unique)
    arities = {len(y) for y in unique.values()}
    if len(arities) != 1:
        raise ValueError(f"mixed objective arities {sorted(arities)}")
    mask = nondominated_mask(np.array([unique[v] for v in vecs]))
    kept = sorted(v for v, keep in zip(vecs, mask) if keep)
    return ParetoSet(tuple((v, unique[v]) for v in kept))


def nondominated_sort(F: np.ndarray) -> list[list[int]]:
    """Fast non-dominated sorting; returns fronts as lists of row indices."""
    F = np.asarray(F, dtype=float)
    n = len(F)
    if n == 0:
        return []
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    done = np.zeros(n, dtype=bool)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while len(current):
        fronts.append(current.tolist())
        done[current] = True
        counts = counts - dom[current].sum(axis=0)
        current = np.flatnonzero((counts == 0) & ~done)
    return fronts


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """Crowding distance of each row within one front; boundary rows get inf."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape if F.ndim == 2 else (len(F), 0)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        lo, hi = F[order[0], k], F[order[-1], k]
        dist[order[0]] = dist[order[-1]] = np.inf
        if hi > lo:
            gaps = (F[order[2:], k] - F[order[:-2], k]) / (hi - lo)
            dist[order[1:-1]] += gaps
    return dist


def nondominated_sort_with_crowding(F: np.ndarray) -> tuple[list[list[int]], np.ndarray, np.ndarray]:
    """Return (fronts, rank per row, crowding per row); rank 0 is the first front."""
    F = np.asarray(F, dtype=float)
    fronts = nondominated_sort(F)
    rank = np.empty(len(F), dtype=int)
    crowd = np.empty(len(F))
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return fronts, rank, crowd
