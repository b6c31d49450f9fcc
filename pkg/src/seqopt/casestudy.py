"""Office-building case study: eleven design variables at four problem scales.

Each scale marks a subset of the options of every variable. For three of the
scales the documented design-option count is not the product of the marked
option sets; both the computed product and the documented count are kept in
``space.metadata``.
"""
from __future__ import annotations

from .space import DesignSpace, StartingBound, VariableSpec

SCALES = ("very_small", "small", "medium", "large")

# name, element tag, field tag, full option list
_VARIABLES = [
    ("shape", "geometry", "architecture", ["Rectangle", "L-shape", "Free form"]),
    ("wwr", "geometry", "architecture", ["25", "50", "75", "95"]),
    ("orientation", "geometry", "architecture", ["0", "45", "90", "135"]),
    ("thermal_mass", "fabric", "architecture", ["LW", "HW"]),
    ("insulation", "fabric", "architecture", ["8.5", "10.625", "12.5", "15.625", "17"]),
    ("window", "fabric", "architecture", ["Double clear", "Triple clear", "Triple LowE"]),
    ("distribution", "hvac", "engineering", ["Radiant", "Forced air"]),
    ("plant", "hvac", "engineering", ["Boiler", "Heat pump"]),
    ("supply_temp", "hvac", "engineering", ["30", "35", "40", "45", "50"]),
    ("setpoint", "controls", "engineering", ["18", "19", "20", "21", "22", "23"]),
    ("setback", "controls", "engineering", ["11", "12", "13", "14", "15", "16"]),
]

# Options marked per scale; variables absent from a scale's dict keep every option.
_SUBSETS = {
    "very_small": {
        "shape": ["Rectangle", "Free form"],
        "wwr": ["25", "50", "95"],
        # no option marked: held at the baseline / nominal value
        "orientation": ["0"],
        "insulation": ["8.5"],
        "window": ["Double clear", "Triple clear"],
        "supply_temp": ["40"],
        "setpoint": ["19", "21", "23"],
        "setback": ["12", "14", "16"],
    },
    "small": {
        "wwr": ["25", "50", "95"],
        "orientation": ["0", "45", "90"],
        "insulation": ["8.5", "12.5", "17"],
        "supply_temp": ["30", "40", "50"],
        "setpoint": ["18", "20", "22"],
        "setback": ["11", "13", "15"],
    },
    "medium": {
        "orientation": ["0", "45", "90"],
        "setpoint": ["19", "21", "23"],
        "setback": ["11", "13", "15"],
    },
    "large": {},
}

STATED_COUNTS = {"very_small": 874, "small": 52_400, "medium": 345_600, "large": 1_036_800}

# Starting points, as option labels, for the four starting bounds.
REFERENCE_BOUNDS = {
    "low": {
        "shape": "Rectangle", "wwr": "25", "orientation": "0", "thermal_mass": "LW",
        "insulation": "8.5", "window": "Double clear", "distribution": "Radiant",
        "plant": "Boiler", "supply_temp": "30", "setpoint": "18", "setback": "11",
    },
    "middle": {
        "shape": "L-shape", "wwr": "50", "orientation": "90", "thermal_mass": "HW",
        "insulation": "12.5", "window": "Triple clear", "distribution": "Radiant",
        "plant": "Heat pump", "supply_temp": "40", "setpoint": "20", "setback": "13",
    },
    "upper": {
        "shape": "Free form", "wwr": "95", "orientation": "135", "thermal_mass": "HW",
        "insulation": "17", "window": "Triple LowE", "distribution": "Forced air",
        "plant": "Heat pump", "supply_temp": "50", "setpoint": "23", "setback": "16",
    },
    "random": {
        "shape": "Free form", "wwr": "75", "orientation": "0", "thermal_mass": "LW",
        "insulation": "10.625", "window": "Triple clear", "distribution": "Radiant",
        "plant": "Boiler", "supply_temp": "45", "setpoint": "21", "setback": "15",
    },
}


def make_case_study_space(scale: str = "large") -> DesignSpace:
    if scale not in _SUBSETS:
        raise ValueError(f"unknown scale {scale!r}; expected one of {SCALES}")
    subset = _SUBSETS[scale]
    variables = []
    for name, element, field_, options in _VARIABLES:
        keep = subset.get(name, options)
        variables.append(VariableSpec(name, tuple(keep), element, field_))
    space = DesignSpace(tuple(variables))
    object.__setattr__(
        space,
        "metadata",
        {
            "scale": scale,
            "computed_count": space.size,
            "stated_count": STATED_COUNTS[scale],
        },
    )
    return space


def middle_overrides(space: DesignSpace) -> dict[str, str]:
    """Middle-bound labels that the floor((m-1)/2) rule does not reproduce."""
    out = {}
    for var in space.variables:
        label = REFERENCE_BOUNDS["middle"][var.name]
        if label in var.options and var.options.index(label) != (var.n_options - 1) // 2:
            out[var.name] = label
    return out


def case_study_bounds(space: DesignSpace, seed: int = 0) -> list[StartingBound]:
    """Low, middle, upper and seeded-random starting bounds for a case-study space."""
    return [
        StartingBound("low", name="low"),
        StartingBound("middle", overrides=middle_overrides(space), name="middle"),
        StartingBound("upper", name="upper"),
        StartingBound("random", seed=seed, name="random"),
    ]


def reference_bound(space: DesignSpace, column: str) -> StartingBound:
    """The reference starting point for ``column`` as an explicit bound.

    Only defined where every label exists in ``space`` (the large scale).
    """
    return StartingBound("explicit", overrides=dict(REFERENCE_BOUNDS[column]), name=column)
