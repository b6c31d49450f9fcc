"""Discrete design spaces, grouping schemes and starting bounds."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

ELEMENT_TAGS = ("geometry", "fabric", "hvac", "controls", "other")
FIELD_TAGS = ("architecture", "engineering", "other")
BOUND_POLICIES = ("low", "middle", "upper", "random", "explicit")

# A design vector is one option index per variable, in space order.
DesignVector = tuple[int, ...]


class SpaceError(ValueError):
    """Raised when a space, grouping or assignment breaks its contract."""


@dataclass(frozen=True)
class VariableSpec:
    name: str
    options: tuple[str, ...]
    element_tag: str = "other"
    field_tag: str = "other"

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(str(o) for o in self.options))

    @property
    def n_options(self) -> int:
        return len(self.options)

    def index(self, label) -> int:
        try:
            return self.options.index(str(label))
        except ValueError:
            raise SpaceError(
                f"variable {self.name!r} has no option {label!r} (options: {list(self.options)})"
            ) from None


@dataclass(frozen=True)
class DesignSpace:
    variables: tuple[VariableSpec, ...]
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        problems = validate_space(self)
        if problems:
            raise SpaceError("; ".join(problems))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.n_options for v in self.variables)

    @property
    def size(self) -> int:
        return math.prod(self.cardinalities)

    def __len__(self) -> int:
        return len(self.variables)

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SpaceError(f"unknown variable {name!r}") from None

    def variable(self, name: str) -> VariableSpec:
        return self.variables[self.position(name)]

    def is_valid(self, v: Sequence[int]) -> bool:
        return len(v) == len(self.variables) and all(
            0 <= int(i) < m for i, m in zip(v, self.cardinalities)
        )

    def check(self, v: Sequence[int]) -> DesignVector:
        if not self.is_valid(v):
            raise SpaceError(f"{tuple(v)} is not a valid design vector for this space")
        return tuple(int(i) for i in v)

    def labels(self, v: Sequence[int]) -> tuple[str, ...]:
        return tuple(var.options[i] for var, i in zip(self.variables, v))

    def from_labels(self, labels: Sequence) -> DesignVector:
        if len(labels) != len(self.variables):
            raise SpaceError(f"expected {len(self.variables)} labels, got {len(labels)}")
        return tuple(var.index(lab) for var, lab in zip(self.variables, labels))

    def all_vectors(self) -> Iterator[DesignVector]:
        return itertools.product(*(range(m) for m in self.cardinalities))

    def rank(self, v: Sequence[int]) -> int:
        """Mixed-radix position of ``v`` in lexicographic enumeration order."""
        r = 0
        for i, m in zip(v, self.cardinalities):
            r = r * m + int(i)
        return r

    def unrank(self, r: int) -> DesignVector:
        out = []
        for m in reversed(self.cardinalities):
            r, i = divmod(r, m)
            out.append(i)
        return tuple(reversed(out))

    def to_dict(self) -> dict:
        return {
            "variables": [
                {
                    "name": v.name,
                    "options": list(v.options),
                    "element": v.element_tag,
                    "field": v.field_tag,
                }
                for v in self.variables
            ]
        }


def validate_space(space: DesignSpace) -> list[str]:
    """Return a list of violations; an empty list means the space is ok."""
    problems = []
    seen = set()
    if not space.variables:
        problems.append("space has no variables")
    for var in space.variables:
        if var.name in seen:
            problems.append(f"duplicate variable name {var.name!r}")
        seen.add(var.name)
        if not var.options:
            problems.append(f"variable {var.name!r} has an empty option list")
        if len(set(var.options)) != len(var.options):
            problems.append(f"variable {var.name!r} has duplicate option labels")
        if var.element_tag not in ELEMENT_TAGS:
            problems.append(f"variable {var.name!r} has bad element tag {var.element_tag!r}")
        if var.field_tag not in FIELD_TAGS:
            problems.append(f"variable {var.name!r} has bad field tag {var.field_tag!r}")
    return problems


def check_variables(variables: Sequence[VariableSpec]) -> list[str]:
    """Validate raw variable specs without constructing a space."""
    space = object.__new__(DesignSpace)
    object.__setattr__(space, "variables", tuple(variables))
    return validate_space(space)


# -- groupings ---------------------------------------------------------------


@dataclass(frozen=True)
class GroupingScheme:
    name: str
    stages: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(tuple(s) for s in self.stages))

    def __len__(self) -> int:
        return len(self.stages)

    def problems(self, space: DesignSpace) -> list[str]:
        out = []
        names = space.names
        counts: dict[str, int] = {}
        for z, stage in enumerate(self.stages, 1):
            if not stage:
                out.append(f"grouping {self.name!r}: stage {z} is empty")
            for n in stage:
                counts[n] = counts.get(n, 0) + 1
                if n not in names:
                    out.append(f"grouping {self.name!r}: unknown variable {n!r}")
        for n in names:
            if counts.get(n, 0) == 0:
                out.append(f"grouping {self.name!r}: variable {n!r} is not assigned to any stage")
            elif counts[n] > 1:
                out.append(f"grouping {self.name!r}: variable {n!r} appears in more than one stage")
        return out

    def check(self, space: DesignSpace) -> "GroupingScheme":
        problems = self.problems(space)
        if problems:
            raise SpaceError("; ".join(problems))
        return self


def ungrouped(space: DesignSpace) -> GroupingScheme:
    return GroupingScheme("ungrouped", tuple((n,) for n in space.names))


def _partition(space: DesignSpace, name: str, attr: str, order: Sequence[str]) -> GroupingScheme:
    stages = []
    for tag in order:
        members = tuple(v.name for v in space.variables if getattr(v, attr) == tag)
        if members:
            stages.append(members)
    return GroupingScheme(name, tuple(stages))


def element_grouped(space: DesignSpace) -> GroupingScheme:
    return _partition(space, "element", "element_tag", ELEMENT_TAGS)


def field_grouped(space: DesignSpace) -> GroupingScheme:
    return _partition(space, "field", "field_tag", FIELD_TAGS)


def single_group(space: DesignSpace) -> GroupingScheme:
    return GroupingScheme("single", (space.names,))


BUILTIN_GROUPINGS = {
    "ungrouped": ungrouped,
    "element": element_grouped,
    "field": field_grouped,
    "single": single_group,
}


def builtin_grouping(space: DesignSpace, name: str) -> GroupingScheme:
    try:
        return BUILTIN_GROUPINGS[name](space)
    except KeyError:
        raise SpaceError(f"unknown grouping {name!r}") from None


# -- enumeration ---------------------------------------------------------------


def enumerate_stage(
    space: DesignSpace, group: Sequence[str], fixed: Mapping[str, int]
) -> Iterator[DesignVector]:
    """Yield every combination of the ``group`` options with the rest held at ``fixed``.

    Order is lexicographic by option index, group variables taken in space order.
    """
    group_set = set(group)
    if len(group_set) != len(group):
        raise SpaceError("group lists a variable twice")
    overlap = group_set & set(fixed)
    if overlap:
        raise SpaceError(f"variables both in group and fixed: {sorted(overlap)}")
    missing = [n for n in space.names if n not in group_set and n not in fixed]
    if missing:
        raise SpaceError(f"variables neither in group nor fixed: {missing}")
    extra = [n for n in list(group_set) + list(fixed) if n not in space.names]
    if extra:
        raise SpaceError(f"unknown variables: {sorted(extra)}")

    template = []
    free = []
    for pos, var in enumerate(space.variables):
        if var.name in group_set:
            template.append(0)
            free.append(pos)
        else:
            i = int(fixed[var.name])
            if not 0 <= i < var.n_options:
                raise SpaceError(f"fixed index {i} out of range for {var.name!r}")
            template.append(i)
    ranges = [range(space.variables[p].n_options) for p in free]
    for combo in itertools.product(*ranges):
        v = list(template)
        for p, i in zip(free, combo):
            v[p] = i
        yield tuple(v)


def stage_size(space: DesignSpace, group: Sequence[str]) -> int:
    return math.prod(space.variable(n).n_options for n in group)


# -- starting bounds -----------------------------------------------------------


@dataclass(frozen=True)
class StartingBound:
    policy: str = "low"
    seed: int = 0
    overrides: Mapping[str, object] = field(default_factory=dict)
    name: str | None = None

    def __post_init__(self):
        if self.policy not in BOUND_POLICIES:
            raise SpaceError(f"unknown bound policy {self.policy!r}")

    @property
    def label(self) -> str:
        return self.name or self.policy


def resolve_bound(space: DesignSpace, bound: StartingBound) -> DesignVector:
    """Resolve a starting-bound policy to one concrete design vector.

    Overrides may be option indices (int) or option labels (str).
    """
    ms = space.cardinalities
    if bound.policy in ("low", "explicit"):
        v = [0] * len(ms)
    elif bound.policy == "upper":
        v = [m - 1 for m in ms]
    elif bound.policy == "middle":
        v = [(m - 1) // 2 for m in ms]
    else:
        rng = np.random.default_rng(bound.seed)
        v = [int(rng.integers(m)) for m in ms]

    for name, value in bound.overrides.items():
        pos = space.position(name)
        var = space.variables[pos]
        if isinstance(value, str):
            idx = var.index(value)
        else:
            idx = int(value)
            if not 0 <= idx < var.n_options:
                raise SpaceError(
                    f"override index {idx} out of range for {name!r} ({var.n_options} options)"
                )
        v[pos] = idx
    if bound.policy == "explicit":
        unset = [n for n in space.names if n not in bound.overrides]
        if unset:
            raise SpaceError(f"explicit bound leaves variables unset: {unset}")
    return tuple(v)


def encode_normalized(space: DesignSpace, v: Sequence[int]) -> np.ndarray:
    """Map option indices onto [0, 1]; single-option variables map to 0."""
    idx = np.asarray(v, dtype=float)
    denom = np.asarray(space.cardinalities, dtype=float) - 1.0
    out = np.zeros_like(idx)
    np.divide(idx, denom, out=out, where=denom > 0)
    return out


def random_space(
    rng: np.random.Generator,
    n_vars: tuple[int, int] = (3, 7),
    n_options: tuple[int, int] = (2, 5),
    max_size: int = 10_000,
) -> DesignSpace:
    """Random space with tags drawn so element and field groupings are non-trivial.

    Cardinalities are redrawn (shrinking the variable count if needed) until the
    full factorial fits in ``max_size``.
    """
    n = int(rng.integers(n_vars[0], n_vars[1] + 1))
    while True:
        ms = [int(rng.integers(n_options[0], n_options[1] + 1)) for _ in range(n)]
        if math.prod(ms) <= max_size:
            break
        n = max(n_vars[0], n - 1)
    variables = []
    for k, m in enumerate(ms):
        element = ELEMENT_TAGS[int(rng.integers(4))]
        field_ = "architecture" if element in ("geometry", "fabric") else "engineering"
        variables.append(VariableSpec(f"x{k}", tuple(f"o{j}" for j in range(m)), element, field_))
    return DesignSpace(tuple(variables))
