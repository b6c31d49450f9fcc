import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqopt.morris import (
    MorrisPlan,
    elementary_effects,
    generate_trajectories,
    grid_steps,
    run_morris,
    step_size,
    trajectory_distance,
)
from seqopt.objectives import EvaluationLedger, FunctionBackend

from conftest import make_space


@pytest.mark.parametrize("m, steps, delta", [(2, 1, 1.0), (3, 1, 0.5), (4, 2, 2 / 3), (5, 2, 0.5), (6, 3, 0.6)])
def test_step_size(m, steps, delta):
    assert grid_steps(m) == steps
    assert step_size(m) == pytest.approx(delta)


def test_linear_function_exact():
    space = make_space(4, 3, 6, 2, 5)
    a = np.array([1.5, -2.0, 0.25, 3.0, -0.75])
    ledger = EvaluationLedger(FunctionBackend(space, lambda x: (a @ x,)))
    res = run_morris(space, ledger, MorrisPlan(r=10, candidate_pool=40, seed=1))
    for name, coef in zip(space.names, a):
        assert res.mu_star(name, "y") == pytest.approx(abs(coef), abs=1e-12)
        assert res.mu(name, "y") == pytest.approx(coef, abs=1e-12)
        assert res.sigma(name, "y") == pytest.approx(0.0, abs=1e-12)


def test_product_has_interaction_spread():
    space = make_space(5, 5)
    ledger = EvaluationLedger(FunctionBackend(space, lambda x: (x[0] * x[1],)))
    res = run_morris(space, ledger, MorrisPlan(r=12, candidate_pool=50, seed=3))
    assert res.sigma("x0", "y") > 0 and res.sigma("x1", "y") > 0


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(2, 6), min_size=1, max_size=6), st.integers(1, 8), st.integers(0, 10**6))
def test_evaluation_count(ms, r, seed):
    space = make_space(*ms)
    ledger = EvaluationLedger(FunctionBackend(space, lambda x: (x.sum(),)))
    res = run_morris(space, ledger, MorrisPlan(r=r, candidate_pool=r + 5, seed=seed))
    assert res.evaluations == r * (len(ms) + 1)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=6), st.integers(0, 10**6))
def test_trajectories_are_one_at_a_time(ms, seed):
    space = make_space(*ms)
    for t in generate_trajectories(space, MorrisPlan(r=3, candidate_pool=6, seed=seed)):
        assert all(space.is_valid(p) for p in t.points)
        for k, (a, b) in enumerate(zip(t.points, t.points[1:])):
            changed = [i for i in range(len(ms)) if a[i] != b[i]]
            assert changed == [t.order[k]]
            assert abs(b[changed[0]] - a[changed[0]]) == grid_steps(ms[changed[0]])
        assert sorted(t.order) == [i for i, m in enumerate(ms) if m >= 2]


def test_single_option_variable_reports_zero():
    space = make_space(3, 1, 4)
    ledger = EvaluationLedger(FunctionBackend(space, lambda x: (x[0] + x[2],)))
    res = run_morris(space, ledger, MorrisPlan(r=4, candidate_pool=8, seed=0))
    assert res.effects["x1", "y"] == [0.0] * 4
    assert res.evaluations == 4 * 3


def test_selection_spreads_trajectories():
    space = make_space(4, 4, 4, 4)
    plan = MorrisPlan(r=4, candidate_pool=30, seed=11)
    chosen = generate_trajectories(space, plan)
    pool_first = generate_trajectories(space, MorrisPlan(r=30, candidate_pool=30, seed=11))[:4]

    def spread(ts):
        return sum(trajectory_distance(space, a, b) for i, a in enumerate(ts) for b in ts[i + 1:])

    assert spread(chosen) >= spread(pool_first)


def test_seeded_and_reproducible():
    space = make_space(3, 4, 5)
    plan = MorrisPlan(r=5, candidate_pool=20, seed=9)
    assert generate_trajectories(space, plan) == generate_trajectories(space, plan)


@pytest.mark.parametrize("plan", [MorrisPlan(r=0), MorrisPlan(r=5, candidate_pool=3)])
def test_bad_plans(plan):
    with pytest.raises(ValueError):
        generate_trajectories(make_space(3, 3), plan)


def test_rows_layout():
    space = make_space(3, 3)
    ledger = EvaluationLedger(FunctionBackend(space, lambda x: (x[0], x[1]), objective_names=("a", "b")))
    res = run_morris(space, ledger, MorrisPlan(r=3, candidate_pool=5, seed=0))
    rows = res.rows()
    assert [(v, o) for v, o, _, _ in rows] == [("x0", "a"), ("x0", "b"), ("x1", "a"), ("x1", "b")]


def test_finite_difference_consistency():
    # recompute every effect directly from the backend along the same trajectories
    space = make_space(4, 3, 5)
    f = lambda x: (np.sin(3 * x[0]) + x[1] * x[2] ** 2,)
    be = FunctionBackend(space, f)
    trajs = generate_trajectories(space, MorrisPlan(r=5, candidate_pool=10, seed=2))
    res = elementary_effects(space, trajs, EvaluationLedger(be))
    for t_idx, t in enumerate(trajs):
        for k, var in enumerate(t.order):
            y0, y1 = be(t.points[k])[0], be(t.points[k + 1])[0]
            assert res.effects[space.names[var], "y"][t_idx] == pytest.approx((y1 - y0) / t.deltas[k])
