"""Objective backends and the memoizing evaluation ledger.

Every backend maps a batch of design vectors (an integer array of option
indices, one row per vector) to a float array of minimized objectives.
"""
from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .space import DesignSpace, DesignVector, SpaceError, encode_normalized

ObjectiveVector = tuple[float, ...]

DEFAULT_COEFFICIENTS = Path(__file__).parent / "data" / "surrogate_coefficients.json"


class BackendError(RuntimeError):
    """A backend failed on a specific design vector."""

    def __init__(self, vector, message: str):
        super().__init__(f"{message} (design vector {tuple(vector)})")
        self.vector = tuple(vector)


class UnevaluatedDesignError(BackendError, KeyError):
    def __init__(self, vector, labels=None):
        shown = labels if labels is not None else vector
        BackendError.__init__(self, vector, f"unevaluated design vector {tuple(shown)}")

    __str__ = BackendError.__str__


class Backend:
    """Base class. Subclasses set ``space``/``objective_names`` and implement ``batch``."""

    space: DesignSpace
    objective_names: tuple[str, ...] = ("f1", "f2")

    @property
    def n_objectives(self) -> int:
        return len(self.objective_names)

    def batch(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, v: Sequence[int]) -> ObjectiveVector:
        out = self.batch(np.asarray([v], dtype=np.int64))
        return tuple(float(x) for x in out[0])


class FunctionBackend(Backend):
    """Wrap a plain function ``f(normalized_x) -> sequence of objectives``."""

    def __init__(self, space: DesignSpace, func: Callable, objective_names=("y",), normalized=True):
        self.space = space
        self.func = func
        self.objective_names = tuple(objective_names)
        self.normalized = normalized

    def batch(self, idx):
        rows = []
        for v in idx:
            x = encode_normalized(self.space, v) if self.normalized else tuple(int(i) for i in v)
            y = self.func(x)
            rows.append(np.atleast_1d(np.asarray(y, dtype=float)))
        return np.asarray(rows, dtype=float).reshape(len(idx), self.n_objectives)


@dataclass
class LedgerSnapshot:
    raw_requests: int
    unique_evaluations: int


class EvaluationLedger:
    """Memoizing evaluation counter bound to one backend.

    ``raw_requests`` counts every requested vector, ``unique_evaluations`` only the
    vectors actually sent to the backend.
    """

    def __init__(self, backend: Backend):
        self.backend = backend
        self.memo: dict[DesignVector, ObjectiveVector] = {}
        self.raw_requests = 0
        self._lock = threading.Lock()

    @property
    def unique_evaluations(self) -> int:
        return len(self.memo)

    def snapshot(self) -> LedgerSnapshot:
        with self._lock:
            return LedgerSnapshot(self.raw_requests, len(self.memo))

    def count(self, mode: str = "unique") -> int:
        if mode == "unique":
            return self.unique_evaluations
        if mode == "raw":
            return self.raw_requests
        raise ValueError(f"unknown count mode {mode!r}")

    def evaluate(self, v: Sequence[int]) -> ObjectiveVector:
        return self.evaluate_many([tuple(v)])[0]

    def evaluate_many(self, vectors: Iterable[Sequence[int]]) -> list[ObjectiveVector]:
        vectors = [tuple(int(i) for i in v) for v in vectors]
        with self._lock:
            self.raw_requests += len(vectors)
            todo = []
            queued = set()
            for v in vectors:
                if v not in self.memo and v not in queued:
                    queued.add(v)
                    todo.append(v)
            if todo:
                values = self._run_backend(todo)
                for v, y in zip(todo, values):
                    self.memo[v] = y
            return [self.memo[v] for v in vectors]

    def _run_backend(self, todo: list[DesignVector]) -> list[ObjectiveVector]:
        arr = np.asarray(todo, dtype=np.int64)
        try:
            out = np.asarray(self.backend.batch(arr), dtype=float)
        except BackendError:
            raise
        except Exception as exc:
            # find the offending vector so the error names it
            for v in todo:
                try:
                    self.backend.batch(np.asarray([v], dtype=np.int64))
                except Exception:
                    raise BackendError(v, f"backend failed: {exc}") from exc
            raise BackendError(todo[0], f"backend failed: {exc}") from exc
        if out.shape != (len(todo), self.backend.n_objectives):
            raise BackendError(todo[0], f"backend returned shape {out.shape}")
        bad = ~np.isfinite(out).all(axis=1)
        if bad.any():
            raise BackendError(todo[int(np.argmax(bad))], "backend returned non-finite objectives")
        return [tuple(float(x) for x in row) for row in out]


# -- analytic surrogate ------------------------------------------------------------


@dataclass(frozen=True)
class SurrogateCoefficients:
    version: str
    A_env: float
    A_roof: float
    R_wall0: float
    R_roof0: float
    k_ins: float
    C_vent: float
    h_occ: float
    h_unocc: float
    T_out: float
    G_sol: float
    G_int: float
    window_u: dict
    window_g: dict
    orient: dict
    mass_mult: dict
    mass_pick: dict
    dist_factor: dict
    dist_pick: dict
    plant_eff: dict
    D0: float
    T_ref: float
    c_cold: float
    c_warm: float
    T_pick: float
    c_pickup: float
    c_draught: float

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateCoefficients":
        names = {f.name for f in fields(cls)}
        missing = names - set(d)
        if missing:
            raise ValueError(f"surrogate coefficients missing {sorted(missing)}")
        return cls(**{k: d[k] for k in names})

    @classmethod
    def load(cls, path=DEFAULT_COEFFICIENTS) -> "SurrogateCoefficients":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _label_table(space: DesignSpace, name: str, table: dict, what: str) -> np.ndarray:
    var = space.variable(name)
    try:
        return np.array([float(table[o]) for o in var.options])
    except KeyError as exc:
        raise ValueError(f"no {what} coefficient for {name} option {exc.args[0]!r}") from None


def _numeric_options(space: DesignSpace, name: str) -> np.ndarray:
    return np.array([float(o) for o in space.variable(name).options])


class SurrogateBackend(Backend):
    """Closed-form heating energy (kWh/yr) and discomfort hours (h/yr) model.

    Works on any space carrying the eleven case-study variables, whatever
    subset of their options it uses.
    """

    objective_names = ("energy_kwh", "discomfort_h")

    def __init__(self, space: DesignSpace, coeffs: SurrogateCoefficients | None = None):
        self.space = space
        self.coeffs = c = coeffs or SurrogateCoefficients.load()
        pos = {n: space.position(n) for n in (
            "shape", "wwr", "orientation", "thermal_mass", "insulation", "window",
            "distribution", "plant", "supply_temp", "setpoint", "setback")}
        self._pos = pos
        self._wwr = _numeric_options(space, "wwr") / 100.0
        self._theta = [o for o in space.variable("orientation").options]
        self._t_ins = _numeric_options(space, "insulation") / 100.0
        self._t_sup = _numeric_options(space, "supply_temp")
        self._t_set = _numeric_options(space, "setpoint")
        self._t_sb = _numeric_options(space, "setback")
        self._u_win = _label_table(space, "window", c.window_u, "window U")
        self._g_win = _label_table(space, "window", c.window_g, "window g")
        self._mass_mult = _label_table(space, "thermal_mass", c.mass_mult, "mass")
        self._mass_pick = _label_table(space, "thermal_mass", c.mass_pick, "mass pickup")
        self._dist_pick = _label_table(space, "distribution", c.dist_pick, "distribution pickup")
        shapes = space.variable("shape").options
        try:
            self._orient = np.array([[float(c.orient[s][t]) for t in self._theta] for s in shapes])
        except KeyError as exc:
            raise ValueError(f"no orientation factor for {exc.args[0]!r}") from None
        dists = space.variable("distribution").options
        plants = space.variable("plant").options
        # dist_factor(dist, T) = a + b*(T - T0)^2 ; eff(plant, T) = e0 - e1*(T - 30)
        self._dist = np.array([[_dist_factor(c.dist_factor[d], t) for t in self._t_sup] for d in dists])
        self._eff = np.array([[_plant_eff(c.plant_eff[p], t) for t in self._t_sup] for p in plants])
        if (self._eff <= 0).any():
            raise ValueError("plant efficiency must stay positive over the supply temperatures")

    def batch(self, idx):
        c = self.coeffs
        p = self._pos
        idx = np.asarray(idx, dtype=np.int64)
        w = self._wwr[idx[:, p["wwr"]]]
        win = idx[:, p["window"]]
        u_win, g_win = self._u_win[win], self._g_win[win]
        t_ins = self._t_ins[idx[:, p["insulation"]]]
        u_wall = 1.0 / (c.R_wall0 + t_ins / c.k_ins)
        u_roof = 1.0 / (c.R_roof0 + t_ins / c.k_ins)
        ua = c.A_env * ((1.0 - w) * u_wall + w * u_win) + c.A_roof * u_roof
        t_set = self._t_set[idx[:, p["setpoint"]]]
        t_sb = self._t_sb[idx[:, p["setback"]]]
        hdh = c.h_occ * np.maximum(0.0, t_set - c.T_out) + c.h_unocc * np.maximum(0.0, t_sb - c.T_out)
        orient = self._orient[idx[:, p["shape"]], idx[:, p["orientation"]]]
        q = np.maximum(0.0, (ua + c.C_vent) * hdh / 1000.0 - c.G_sol * w * orient * g_win - c.G_int)
        sup = idx[:, p["supply_temp"]]
        dist = idx[:, p["distribution"]]
        mass = idx[:, p["thermal_mass"]]
        energy = q * self._mass_mult[mass] * self._dist[dist, sup] / self._eff[idx[:, p["plant"]], sup]
        discomfort = (
            c.D0 * (1.0 + c.c_cold * np.maximum(0.0, c.T_ref - t_set) ** 2
                    + c.c_warm * np.maximum(0.0, t_set - c.T_ref))
            + c.c_pickup * np.maximum(0.0, c.T_pick - t_sb) * self._mass_pick[mass] * self._dist_pick[dist]
            + c.c_draught * w * (u_win / 2.8)
        )
        return np.column_stack([energy, discomfort])


def _dist_factor(params: dict, t: float) -> float:
    return params["a"] + params["b"] * (t - params["T0"]) ** 2


def _plant_eff(params: dict, t: float) -> float:
    return params["e0"] - params["e1"] * (t - 30.0)


# -- table backend ---------------------------------------------------------------


class TableBackend(Backend):
    """Exact-row lookup into a table of pre-computed objectives."""

    def __init__(self, space: DesignSpace, rows: dict, objective_names: Sequence[str]):
        self.space = space
        self.rows = rows
        self.objective_names = tuple(objective_names)

    def batch(self, idx):
        out = np.empty((len(idx), self.n_objectives))
        for k, v in enumerate(idx):
            key = tuple(int(i) for i in v)
            try:
                out[k] = self.rows[key]
            except KeyError:
                labels = self.space.labels(key) if self.space.is_valid(key) else None
                raise UnevaluatedDesignError(key, labels) from None
        return out

    @classmethod
    def from_csv(cls, path, space: DesignSpace, objective_columns: Sequence[str] | None = None):
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty table") from None
            names = space.names
            if tuple(header[: len(names)]) != names:
                raise ValueError(f"{path}: header must start with variables {list(names)}, got {header}")
            rest = header[len(names):]
            objective_columns = list(objective_columns) if objective_columns else rest
            try:
                cols = [len(names) + rest.index(o) for o in objective_columns]
            except ValueError:
                raise ValueError(f"{path}: missing objective columns {objective_columns}") from None
            if not cols:
                raise ValueError(f"{path}: no objective columns")
            rows = {}
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                try:
                    v = space.from_labels(row[: len(names)])
                    rows[v] = tuple(float(row[c]) for c in cols)
                except (SpaceError, ValueError, IndexError) as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls(space, rows, objective_columns)


def write_table_csv(path, space: DesignSpace, items, objective_names: Sequence[str], extra=None):
    """Write ``(vector, objectives)`` pairs as a label-keyed CSV.

    ``extra`` optionally maps a trailing column name to a per-row function.
    """
    extra = extra or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(space.names) + list(objective_names) + list(extra))
        for v, y in items:
            row = list(space.labels(v)) + [repr(float(x)) for x in y]
            row += [fn(v) for fn in extra.values()]
            writer.writerow(row)


# -- synthetic benchmarks ---------------------------------------------------------------

BENCHMARK_FAMILIES = ("sphere", "random", "interaction")


class SphereBackend(Backend):
    """Two discretized sphere objectives with optima at opposite corners."""

    objective_names = ("f1", "f2")

    def __init__(self, space: DesignSpace, seed: int = 0, ridge: float = 0.0):
        self.space = space
        rng = np.random.default_rng(seed)
        n = len(space)
        self.a = rng.uniform(0.0, 0.3, n)
        self.b = rng.uniform(0.7, 1.0, n)
        self.weights = rng.uniform(0.5, 1.5, n)
        self.ridge = ridge
        self._denom = np.maximum(np.asarray(space.cardinalities, float) - 1.0, 1.0)

    def batch(self, idx):
        x = np.asarray(idx, float) / self._denom
        f1 = ((x - self.a) ** 2 * self.weights).sum(axis=1)
        f2 = ((x - self.b) ** 2 * self.weights).sum(axis=1)
        if self.ridge:
            f2 = f2 + self.ridge * np.abs(x - self.b).max(axis=1)
        return np.column_stack([f1, f2])


class RandomTableBackend(Backend):
    """Independent uniform objectives per design vector, drawn from a seeded stream."""

    def __init__(self, space: DesignSpace, seed: int = 0, n_objectives: int = 2, max_size: int = 5_000_000):
        if space.size > max_size:
            raise ValueError(f"random table of {space.size} rows exceeds {max_size}")
        self.space = space
        self.objective_names = tuple(f"f{k + 1}" for k in range(n_objectives))
        self.table = np.random.default_rng(seed).random((space.size, n_objectives))
        self._radix = np.array(
            [math.prod(space.cardinalities[i + 1:]) for i in range(len(space))], dtype=np.int64
        )

    def batch(self, idx):
        ranks = np.asarray(idx, dtype=np.int64) @ self._radix
        return self.table[ranks]


class InteractionBackend(Backend):
    """Separable per-option terms plus weighted pairwise interaction terms.

    With ``interaction`` = 0 every objective is a sum of per-variable terms.
    """

    def __init__(self, space: DesignSpace, seed: int = 0, n_objectives: int = 2,
                 interaction: float = 0.0, density: float = 1.0):
        self.space = space
        self.objective_names = tuple(f"f{k + 1}" for k in range(n_objectives))
        rng = np.random.default_rng(seed)
        ms = space.cardinalities
        self.unary = [rng.random((n_objectives, m)) for m in ms]
        self.pairs = []
        n = len(ms)
        for i in range(n):
            for j in range(i + 1, n):
                tab = rng.random((n_objectives, ms[i], ms[j]))
                keep = rng.random() < density
                if keep and interaction:
                    self.pairs.append((i, j, interaction * tab))

    def batch(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        out = np.zeros((len(idx), self.n_objectives))
        for i, tab in enumerate(self.unary):
            out += tab[:, idx[:, i]].T
        for i, j, tab in self.pairs:
            out += tab[:, idx[:, i], idx[:, j]].T
        return out


def benchmark_backend(family: str, space: DesignSpace, seed: int = 0, **params) -> Backend:
    if family == "sphere":
        return SphereBackend(space, seed=seed, **params)
    if family == "random":
        return RandomTableBackend(space, seed=seed, **params)
    if family == "interaction":
        return InteractionBackend(space, seed=seed, **params)
    raise ValueError(f"unknown benchmark family {family!r}; expected one of {BENCHMARK_FAMILIES}")
