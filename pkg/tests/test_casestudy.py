import pytest

from seqopt.casestudy import (
    REFERENCE_BOUNDS,
    SCALES,
    STATED_COUNTS,
    case_study_bounds,
    make_case_study_space,
    middle_overrides,
    reference_bound,
)
from seqopt.space import builtin_grouping, resolve_bound, stage_size


@pytest.mark.parametrize("scale, size", [
    ("very_small", 864),
    ("small", 52_488),
    ("medium", 194_400),
    ("large", 1_036_800),
])
def test_scale_sizes(scale, size):
    space = make_case_study_space(scale)
    assert len(space) == 11
    assert space.size == size
    assert space.metadata["computed_count"] == size
    assert space.metadata["stated_count"] == STATED_COUNTS[scale]


def test_unknown_scale():
    with pytest.raises(ValueError, match="unknown scale"):
        make_case_study_space("huge")


def test_large_field_stages():
    space = make_case_study_space("large")
    g = builtin_grouping(space, "field")
    assert [stage_size(space, s) for s in g.stages] == [1440, 720]


def test_large_element_stages():
    space = make_case_study_space("large")
    g = builtin_grouping(space, "element")
    assert [stage_size(space, s) for s in g.stages] == [48, 30, 20, 36]


@pytest.mark.parametrize("column", ["low", "middle", "upper"])
def test_policy_bounds_match_reference_points_on_large(column):
    space = make_case_study_space("large")
    by_name = {b.label: b for b in case_study_bounds(space)}
    assert resolve_bound(space, by_name[column]) == resolve_bound(space, reference_bound(space, column))


def test_reference_random_point_is_valid():
    space = make_case_study_space("large")
    v = resolve_bound(space, reference_bound(space, "random"))
    assert space.labels(v) == tuple(REFERENCE_BOUNDS["random"][n] for n in space.names)


@pytest.mark.parametrize("scale", SCALES)
def test_middle_overrides_only_use_existing_labels(scale):
    space = make_case_study_space(scale)
    for name, label in middle_overrides(space).items():
        assert label in space.variable(name).options
