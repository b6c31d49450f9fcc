"""Morris elementary-effects screening on a discrete design space.

Each variable with m levels is screened on the normalized grid {0, 1/(m-1), ..., 1}
with a step of floor(m/2) grid cells. For even m this is the usual
m / (2 (m - 1)) jump, and for odd m it is the nearest step that stays on the grid.
Trajectories are picked from a larger random pool to maximize their spread.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objectives import EvaluationLedger
from .space import DesignSpace, DesignVector, encode_normalized


@dataclass(frozen=True)
class MorrisPlan:
    r: int = 20
    candidate_pool: int = 100
    seed: int = 0


@dataclass(frozen=True)
class Trajectory:
    points: tuple[DesignVector, ...]
    order: tuple[int, ...]  # variable position changed between points k and k+1
    deltas: tuple[float, ...]  # signed normalized step for each change


@dataclass
class MorrisResult:
    variables: tuple[str, ...]
    objectives: tuple[str, ...]
    effects: dict = field(default_factory=dict)  # (variable, objective) -> list of EE
    evaluations: int = 0

    def mu_star(self, var: str, obj: str) -> float:
        return float(np.mean(np.abs(self.effects[var, obj])))

    def mu(self, var: str, obj: str) -> float:
        return float(np.mean(self.effects[var, obj]))

    def sigma(self, var: str, obj: str) -> float:
        ee = self.effects[var, obj]
        return float(np.std(ee, ddof=1)) if len(ee) > 1 else float("nan")

    def rows(self) -> list[tuple[str, str, float, float]]:
        return [
            (v, o, self.mu_star(v, o), self.sigma(v, o))
            for v in self.variables
            for o in self.objectives
        ]


def grid_steps(m: int) -> int:
    return m // 2


def step_size(m: int) -> float:
    return grid_steps(m) / (m - 1)


def screened_positions(space: DesignSpace) -> list[int]:
    return [k for k, m in enumerate(space.cardinalities) if m >= 2]


def _random_trajectory(space: DesignSpace, rng: np.random.Generator) -> Trajectory:
    ms = space.cardinalities
    cur = [int(rng.integers(m)) for m in ms]
    points = [tuple(cur)]
    order = [int(k) for k in rng.permutation(screened_positions(space))]
    deltas = []
    for k in order:
        m, s = ms[k], grid_steps(ms[k])
        up, down = cur[k] + s <= m - 1, cur[k] - s >= 0
        if up and down:
            sign = 1 if rng.random() < 0.5 else -1
        else:
            sign = 1 if up else -1
        cur[k] += sign * s
        points.append(tuple(cur))
        deltas.append(sign * step_size(m))
    return Trajectory(tuple(points), tuple(order), tuple(deltas))


def _encode(space: DesignSpace, t: Trajectory) -> np.ndarray:
    return np.array([encode_normalized(space, p) for p in t.points])


def _pair_distance(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)).sum())


def trajectory_distance(space: DesignSpace, a: Trajectory, b: Trajectory) -> float:
    """Sum of Euclidean distances over all point pairs of two trajectories."""
    return _pair_distance(_encode(space, a), _encode(space, b))


def generate_trajectories(space: DesignSpace, plan: MorrisPlan, rng: np.random.Generator | None = None) -> list[Trajectory]:
    """Draw ``candidate_pool`` random trajectories and greedily keep the ``r`` most spread out."""
    if plan.r < 1:
        raise ValueError("r must be >= 1")
    if plan.candidate_pool < plan.r:
        raise ValueError(f"candidate pool ({plan.candidate_pool}) smaller than r ({plan.r})")
    rng = rng if rng is not None else np.random.default_rng(plan.seed)
    pool = [_random_trajectory(space, rng) for _ in range(plan.candidate_pool)]
    if plan.r == len(pool):
        return pool
    M = len(pool)
    enc = [_encode(space, t) for t in pool]
    D = np.zeros((M, M))
    for i in range(M):
        for j in range(i + 1, M):
            D[i, j] = D[j, i] = _pair_distance(enc[i], enc[j])
    if plan.r == 1:
        return [pool[0]]
    i, j = np.unravel_index(int(np.argmax(D)), D.shape)
    chosen = [int(min(i, j)), int(max(i, j))]
    while len(chosen) < plan.r:
        total = D[:, chosen].sum(axis=1)
        total[chosen] = -np.inf
        chosen.append(int(np.argmax(total)))
    return [pool[k] for k in chosen]


def elementary_effects(space: DesignSpace, trajectories: list[Trajectory], ledger: EvaluationLedger) -> MorrisResult:
    """Elementary effects per variable and objective along each trajectory.

    Single-option variables are not perturbed and report r zero effects.
    """
    objectives = ledger.backend.objective_names
    result = MorrisResult(space.names, tuple(objectives))
    r = len(trajectories)
    for var in space.variables:
        for obj in objectives:
            result.effects[var.name, obj] = [] if var.n_options >= 2 else [0.0] * r
    before = ledger.raw_requests
    for t in trajectories:
        ys = np.array(ledger.evaluate_many(t.points))
        for step, (k, delta) in enumerate(zip(t.order, t.deltas)):
            if delta == 0:
                raise ValueError("degenerate Morris step")
            ee = (ys[step + 1] - ys[step]) / delta
            name = space.variables[k].name
            for o, obj in enumerate(objectives):
                result.effects[name, obj].append(float(ee[o]))
    result.evaluations = ledger.raw_requests - before
    return result


def run_morris(space: DesignSpace, ledger: EvaluationLedger, plan: MorrisPlan) -> MorrisResult:
    return elementary_effects(space, generate_trajectories(space, plan), ledger)
