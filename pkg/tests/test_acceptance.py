"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import json
import time

import numpy as np
import pytest

from seqopt.casestudy import make_case_study_space
from seqopt.cli import main as cli_main
from seqopt.config import CONFIG_DIR, load_config
from seqopt.metrics import computational_load, computational_savings, compute_metrics, effectiveness, percent
from seqopt.morris import MorrisPlan, run_morris
from seqopt.nsga2 import GaConfig, repeated_run_protocol, run_nsga2
from seqopt.objectives import EvaluationLedger, FunctionBackend, InteractionBackend, RandomTableBackend, SurrogateBackend
from seqopt.pareto import extract_nondominated
from seqopt.sequential import SequentialConfig, run_full_factorial, run_initial, run_sequential
from seqopt.space import StartingBound, builtin_grouping, random_space, stage_size

from conftest import make_space, record

GROUPINGS = ("ungrouped", "element", "field")
POLICIES = ("low", "middle", "upper", "random")


def instances(n, max_size, seed, **kw):
    rng = np.random.default_rng(seed)
    for k in range(n):
        yield k, random_space(rng, max_size=max_size, **kw)


def stage_formula(space, trace):
    total = 0
    for p in trace.passes:
        carried = 1
        for s in p.stages:
            total += carried * stage_size(space, s.group)
            carried = len(s.pareto)
    return total


def test_metric_anchors():
    checks = {
        "effectiveness(28,28)=1.0": effectiveness(28, 28) == 1.0,
        "effectiveness(23,28)=0.821": round(effectiveness(23, 28), 3) == 0.821,
        "load(100700)=9.7%": percent(computational_load(100_700, 1_036_800)) == 9.7,
        "load(78405)=7.6%": percent(computational_load(78_405, 1_036_800)) == 7.6,
        "savings(100700) in [90.3, 92.4]": 90.3 <= percent(computational_savings(100_700, 1_036_800)) <= 92.4,
    }
    bad = [k for k, ok in checks.items() if not ok]
    assert record("metric arithmetic anchors", not bad, "all 5 anchors" if not bad else f"failed {bad}")


def test_single_group_equivalence():
    t, n = time.time(), 0
    mismatches = []
    for k, space in instances(100, 20_000, seed=101):
        be = RandomTableBackend(space, seed=k)
        oracle = run_full_factorial(space, EvaluationLedger(be))
        cfg = SequentialConfig(space, builtin_grouping(space, "single"), StartingBound("random", seed=k))
        if run_initial(cfg, EvaluationLedger(be)).final != oracle:
            mismatches.append(k)
        n += 1
    dt = time.time() - t
    ok = not mismatches and n >= 100 and dt < 60
    assert record("single-group equivalence", ok, f"{n} instances, {len(mismatches)} mismatches, {dt:.1f}s")


def test_separability_oracle():
    t, n, misses = time.time(), 0, []
    for k, space in instances(50, 10_000, seed=202):
        be = InteractionBackend(space, seed=k, interaction=0.0)
        oracle = run_full_factorial(space, EvaluationLedger(be)).vector_set()
        for policy in POLICIES:
            cfg = SequentialConfig(space, builtin_grouping(space, "ungrouped"), StartingBound(policy, seed=k))
            found = run_initial(cfg, EvaluationLedger(be)).final.vector_set()
            n += 1
            if not oracle <= found:
                misses.append((k, policy))
    dt = time.time() - t
    ok = not misses and dt < 60
    assert record("separability oracle (ungrouped initial = 100%)", ok, f"{n} runs, {len(misses)} incomplete, {dt:.1f}s")


def test_iterative_non_regression_and_accounting():
    t, n, regress, bad_count = time.time(), 0, [], []
    for k, space in instances(50, 10_000, seed=303):
        be = RandomTableBackend(space, seed=k)
        oracle = run_full_factorial(space, EvaluationLedger(be)).vector_set()
        for g in GROUPINGS:
            for policy in POLICIES:
                cfg = SequentialConfig(space, builtin_grouping(space, g), StartingBound(policy, seed=k))
                initial, iterative = run_sequential(cfg, EvaluationLedger(be))
                n += 1
                if len(iterative.final.vector_set() & oracle) < len(initial.final.vector_set() & oracle):
                    regress.append((k, g, policy))
                if initial.raw_requests != stage_formula(space, initial) or \
                        iterative.raw_requests != initial.raw_requests + stage_formula(space, iterative):
                    bad_count.append((k, g, policy))
    dt = time.time() - t
    ok = not regress and n >= 600 and dt < 300
    record("iterative non-regression", ok, f"{n} runs on 50 instances, {len(regress)} regressions, {dt:.1f}s")

    space = make_case_study_space("large")
    cfg = SequentialConfig(space, builtin_grouping(space, "field"), StartingBound("low"))
    stage1 = run_initial(cfg, EvaluationLedger(SurrogateBackend(space))).passes[0].stages[0].generated_count
    ok2 = not bad_count and stage1 == 1440
    record("evaluation accounting", ok2, f"{n} runs checked, {len(bad_count)} mismatches; large field stage 1 = {stage1}")
    assert ok and ok2


def test_grouping_monotonicity_on_surrogate():
    t = time.time()
    space = make_case_study_space("small")
    be = SurrogateBackend(space)
    oracle = run_full_factorial(space, EvaluationLedger(be))
    bounds = load_config("case-study-small.json").bounds
    means = {}
    for g in GROUPINGS:
        effs = []
        for b in bounds:
            _, it = run_sequential(SequentialConfig(space, builtin_grouping(space, g), b), EvaluationLedger(be))
            effs.append(compute_metrics(it.final, oracle, space, it.raw_requests, it.unique_evaluations).effectiveness)
        means[g] = float(np.mean(effs))
    dt = time.time() - t
    ok = means["ungrouped"] <= means["element"] <= means["field"] and space.size <= 100_000 and dt < 600
    detail = ", ".join(f"{g} {100 * v:.1f}%" for g, v in means.items())
    assert record("grouping monotonicity (small surrogate, iterative)", ok, f"{detail}; {dt:.1f}s")


def test_pareto_oracle():
    rng = np.random.default_rng(404)
    bad = 0
    for k in range(1000):
        n, m = int(rng.integers(1, 201)), int(rng.choice([2, 3]))
        # integer-valued objectives so ties and duplicates are common
        F = rng.integers(0, 12, size=(n, m)).astype(float) if k % 2 else rng.random((n, m))
        le = (F[:, None, :] <= F[None, :, :]).all(axis=2)
        lt = (F[:, None, :] < F[None, :, :]).any(axis=2)
        brute = {i for i in range(n) if not (le[:, i] & lt[:, i]).any()}
        got = {v[0] for v in extract_nondominated(((i,), tuple(F[i])) for i in range(n)).vectors}
        bad += got != brute
    assert record("Pareto oracle vs brute force", bad == 0, f"1000 sets, {bad} mismatches")


def test_nsga2_determinism():
    space = make_case_study_space("very_small")
    be = SurrogateBackend(space)
    ga = GaConfig(population_size=30, budget=300, seed=17)
    first = run_nsga2(space, be, ga)
    same = all(run_nsga2(space, be, ga) == first for _ in range(2))
    serial = repeated_run_protocol(space, be, ga, runs=8, keep=4, jobs=1)
    parallel = repeated_run_protocol(space, be, ga, runs=8, keep=4, jobs=8)
    ok = same and serial == parallel
    assert record("NSGA-II seeded determinism", ok, f"3 reruns identical: {same}; jobs 1 vs 8 identical: {serial == parallel}")


def test_nsga2_not_better_than_field_sequential():
    t = time.time()
    wins, rows = 0, []
    rng = np.random.default_rng(1000)
    for k in range(25):
        space = random_space(rng, n_vars=(5, 8), n_options=(2, 4), max_size=10_000)
        be = InteractionBackend(space, seed=k, interaction=0.3)
        oracle = run_full_factorial(space, EvaluationLedger(be))
        cfg = SequentialConfig(space, builtin_grouping(space, "field"), StartingBound("low"))
        _, it = run_sequential(cfg, EvaluationLedger(be))
        seq = compute_metrics(it.final, oracle, space, it.raw_requests, it.unique_evaluations).effectiveness
        ga = GaConfig(population_size=30, budget=max(it.unique_evaluations, 30), seed=10_000 * k)
        proto = repeated_run_protocol(space, be, ga, runs=20, keep=4, global_set=oracle)
        ga_eff = float(np.mean([found for found, _ in proto.scores])) / len(oracle)
        wins += ga_eff <= seq
        rows.append((seq, ga_eff))
    dt = time.time() - t
    ok = wins >= 20 and dt < 900
    mean_seq = np.mean([s for s, _ in rows])
    mean_ga = np.mean([g for _, g in rows])
    assert record(
        "NSGA-II vs field-grouped iterative",
        ok,
        f"NSGA-II <= sequential on {wins}/25 instances (mean {100 * mean_ga:.1f}% vs {100 * mean_seq:.1f}%), {dt:.0f}s",
    )


def test_morris_analytic():
    space = make_space(4, 3, 6, 2, 5, 3)
    a = np.array([2.0, -1.0, 0.5, 4.0, -3.0, 1.25])
    r = 15
    ledger = EvaluationLedger(FunctionBackend(space, lambda x: (a @ x,)))
    res = run_morris(space, ledger, MorrisPlan(r=r, candidate_pool=60, seed=5))
    lin = all(abs(res.mu_star(v, "y") - abs(c)) <= 1e-12 and res.sigma(v, "y") <= 1e-12
              for v, c in zip(space.names, a))
    count = res.evaluations == r * (len(space) + 1)
    prod_space = make_space(5, 5)
    res2 = run_morris(prod_space, EvaluationLedger(FunctionBackend(prod_space, lambda x: (x[0] * x[1],))),
                      MorrisPlan(r=r, candidate_pool=60, seed=5))
    inter = res2.sigma("x0", "y") > 0 and res2.sigma("x1", "y") > 0
    ok = lin and count and inter
    assert record("Morris analytic checks", ok,
                  f"linear mu*=|a|, sigma=0: {lin}; x1*x2 sigma>0: {inter}; evaluations=r(n+1): {count}")


def test_end_to_end_suite(tmp_path):
    t = time.time()
    cfg = CONFIG_DIR / "case-study-very-small.json"
    a, b = tmp_path / "a", tmp_path / "b"
    codes = [cli_main(["suite", "--config", str(cfg), "--out", str(d)]) for d in (a, b)]
    rows = len(json.loads((a / "summary.json").read_text())["sequential"])
    tables = (a / "table5.csv").exists() and (a / "table6.csv").exists()
    names = sorted(p.name for p in a.iterdir() if p.name != "environment.json")
    identical = all((a / n).read_bytes() == (b / n).read_bytes() for n in names)
    dt = time.time() - t
    ok = codes == [0, 0] and rows == 24 and tables and identical and dt < 300
    assert record("end-to-end suite (very small)", ok,
                  f"{rows} rows, tables written: {tables}, {len(names)} files byte-identical: {identical}, {dt:.0f}s")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
