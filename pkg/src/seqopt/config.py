"""Experiment configuration: JSON schema, loading and validation."""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .casestudy import SCALES, make_case_study_space
from .morris import MorrisPlan
from .objectives import (
    BENCHMARK_FAMILIES,
    DEFAULT_COEFFICIENTS,
    Backend,
    SurrogateBackend,
    SurrogateCoefficients,
    TableBackend,
    benchmark_backend,
)
from .space import (
    BOUND_POLICIES,
    ELEMENT_TAGS,
    FIELD_TAGS,
    BUILTIN_GROUPINGS,
    DesignSpace,
    GroupingScheme,
    SpaceError,
    StartingBound,
    VariableSpec,
    builtin_grouping,
    check_variables,
    resolve_bound,
)
from .sequential import DEFAULT_BUDGET_CAP

SCHEMA_VERSION = 1
CONFIG_DIR = Path(__file__).parent / "data" / "configs"

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "space", "backend"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "space": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["case_study"],
                    "additionalProperties": False,
                    "properties": {"case_study": {"enum": list(SCALES)}},
                },
                {
                    "type": "object",
                    "required": ["variables"],
                    "additionalProperties": False,
                    "properties": {
                        "variables": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "required": ["name", "options"],
                                "additionalProperties": False,
                                "properties": {
                                    "name": {"type": "string", "minLength": 1},
                                    "options": {
                                        "type": "array",
                                        "minItems": 1,
                                        "items": {"type": ["string", "number"]},
                                    },
                                    "element": {"enum": list(ELEMENT_TAGS)},
                                    "field": {"enum": list(FIELD_TAGS)},
                                },
                            },
                        }
                    },
                },
            ]
        },
        "backend": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "surrogate"},
                        "coefficients": {"type": ["string", "null"]},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "path"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "csv"},
                        "path": {"type": "string"},
                        "objectives": {"type": "array", "items": {"type": "string"}},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "family"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "benchmark"},
                        "family": {"enum": list(BENCHMARK_FAMILIES)},
                        "seed": {"type": "integer"},
                        "params": {"type": "object"},
                    },
                },
            ]
        },
        "groupings": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"enum": list(BUILTIN_GROUPINGS)},
                    {
                        "type": "object",
                        "required": ["name", "stages"],
                        "additionalProperties": False,
                        "properties": {
                            "name": {"type": "string"},
                            "stages": {
                                "type": "array",
                                "minItems": 1,
                                "items": {"type": "array", "items": {"type": "string"}},
                            },
                        },
                    },
                ]
            },
        },
        "bounds": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"enum": [p for p in BOUND_POLICIES if p != "explicit"]},
                    {
                        "type": "object",
                        "required": ["policy"],
                        "additionalProperties": False,
                        "properties": {
                            "policy": {"enum": list(BOUND_POLICIES)},
                            "name": {"type": "string"},
                            "seed": {"type": "integer"},
                            "overrides": {
                                "type": "object",
                                "additionalProperties": {"type": ["string", "integer"]},
                            },
                        },
                    },
                ]
            },
        },
        "iterative_depth": {"type": "integer", "minimum": 0},
        "nsga2": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "population_size": {"type": "integer", "minimum": 2},
                "crossover_prob": {"type": "number", "minimum": 0, "maximum": 1},
                "mutation_rate": {"type": "number", "minimum": 0, "maximum": 1},
                "runs": {"type": "integer", "minimum": 1},
                "keep": {"type": "integer", "minimum": 1},
                "budget": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "full_factorial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "budget_cap": {"type": "integer", "minimum": 1},
            },
        },
        "morris": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {
                "r": {"type": "integer", "minimum": 0},
                "candidate_pool": {"type": "integer", "minimum": 1},
            },
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        "count_mode": {"enum": ["unique", "raw"]},
        "jobs": {"type": "integer", "minimum": 1},
    },
}


class ConfigError(ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Nsga2Settings:
    enabled: bool = True
    population_size: int = 30
    crossover_prob: float = 0.5
    mutation_rate: float = 0.1
    runs: int = 20
    keep: int = 4
    budget: int | None = None  # None: field-grouped iterative count of the same suite


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    space: DesignSpace
    backend_spec: dict
    groupings: tuple[GroupingScheme, ...]
    bounds: tuple[StartingBound, ...]
    iterative_depth: int = 1
    nsga2: Nsga2Settings = field(default_factory=Nsga2Settings)
    full_factorial: bool = True
    budget_cap: int = DEFAULT_BUDGET_CAP
    morris: MorrisPlan | None = None
    output_dir: str = "results"
    seed: int = 0
    count_mode: str = "unique"
    jobs: int = 1
    base_dir: str = "."

    def build_backend(self) -> Backend:
        return build_backend(self.backend_spec, self.space, Path(self.base_dir))


def derive_seed(root: int, *labels: str) -> int:
    """Child seed for a named component: SeedSequence(root) keyed by CRC32 of each label."""
    key = tuple(zlib.crc32(str(label).encode("utf-8")) for label in labels)
    return int(np.random.SeedSequence(root, spawn_key=key).generate_state(1)[0])


def build_backend(spec: dict, space: DesignSpace, base_dir: Path) -> Backend:
    kind = spec["type"]
    if kind == "surrogate":
        path = spec.get("coefficients")
        coeffs = SurrogateCoefficients.load(base_dir / path if path else DEFAULT_COEFFICIENTS)
        return SurrogateBackend(space, coeffs)
    if kind == "csv":
        return TableBackend.from_csv(base_dir / spec["path"], space, spec.get("objectives"))
    if kind == "benchmark":
        return benchmark_backend(spec["family"], space, seed=spec.get("seed", 0), **spec.get("params", {}))
    raise ConfigError(f"unknown backend type {kind!r}")


def _schema_problems(data) -> list[str]:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    out = []
    for err in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def _build_space(spec: dict) -> DesignSpace:
    if "case_study" in spec:
        return make_case_study_space(spec["case_study"])
    variables = [
        VariableSpec(v["name"], tuple(str(o) for o in v["options"]), v.get("element", "other"), v.get("field", "other"))
        for v in spec["variables"]
    ]
    problems = check_variables(variables)
    if problems:
        raise ConfigError([f"space: {p}" for p in problems])
    return DesignSpace(tuple(variables))


def _build_bound(item, root_seed: int) -> StartingBound:
    if isinstance(item, str):
        item = {"policy": item}
    name = item.get("name", item["policy"])
    seed = item.get("seed", derive_seed(root_seed, "bound", name))
    return StartingBound(item["policy"], seed=seed, overrides=dict(item.get("overrides", {})), name=name)


def config_from_dict(data: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    problems = _schema_problems(data)
    if problems:
        raise ConfigError(problems)
    base_dir = Path(base_dir)
    try:
        space = _build_space(data["space"])
    except SpaceError as exc:
        raise ConfigError(f"space: {exc}") from None
    seed = data.get("seed", 0)

    groupings = []
    problems = []
    for item in data.get("groupings", ["ungrouped", "element", "field"]):
        g = builtin_grouping(space, item) if isinstance(item, str) else GroupingScheme(item["name"], item["stages"])
        problems += g.problems(space)
        groupings.append(g)

    bounds = [_build_bound(b, seed) for b in data.get("bounds", ["low", "middle", "upper", "random"])]
    for b in bounds:
        try:
            resolve_bound(space, b)
        except SpaceError as exc:
            problems.append(f"bounds/{b.label}: {exc}")

    backend = data["backend"]
    if backend["type"] == "csv" and not (base_dir / backend["path"]).is_file():
        problems.append(f"backend/path: file not found: {base_dir / backend['path']}")
    if backend["type"] == "surrogate" and backend.get("coefficients"):
        if not (base_dir / backend["coefficients"]).is_file():
            problems.append(f"backend/coefficients: file not found: {base_dir / backend['coefficients']}")
    nsga = Nsga2Settings(**data.get("nsga2", {}))
    if nsga.keep > nsga.runs:
        problems.append("nsga2: keep must not exceed runs")
    if problems:
        raise ConfigError(problems)

    ff = data.get("full_factorial", {})
    morris = data.get("morris")
    return ExperimentConfig(
        name=data.get("name", "experiment"),
        space=space,
        backend_spec=dict(backend),
        groupings=tuple(groupings),
        bounds=tuple(bounds),
        iterative_depth=data.get("iterative_depth", 1),
        nsga2=nsga,
        full_factorial=ff.get("enabled", True),
        budget_cap=ff.get("budget_cap", DEFAULT_BUDGET_CAP),
        morris=None if morris is None else MorrisPlan(
            r=morris.get("r", 20),
            candidate_pool=morris.get("candidate_pool", 100),
            seed=derive_seed(seed, "morris"),
        ),
        output_dir=data.get("output_dir", "results"),
        seed=seed,
        count_mode=data.get("count_mode", "unique"),
        jobs=data.get("jobs", 1),
        base_dir=str(base_dir),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Load a JSON config; a bare file name also resolves against the shipped configs.

    ``overrides`` replaces top-level keys before validation (e.g. seed, jobs).
    """
    path = Path(path)
    if not path.exists() and (CONFIG_DIR / path.name).exists():
        path = CONFIG_DIR / path.name
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    if overrides and isinstance(data, dict):
        data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data, path.parent)
