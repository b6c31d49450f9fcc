"""Effectiveness and load of every grouping x bound across case-study scales (no NSGA-II).

    python3 scripts/scale_study.py --scales very_small small medium
"""
import argparse
import time

from seqopt.casestudy import SCALES
from seqopt.config import load_config
from seqopt.metrics import compute_metrics, percent
from seqopt.suite import run_oracle, run_sequential_grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scales", nargs="+", choices=SCALES, default=["very_small", "small"])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)

    print(f"{'scale':<11}{'grouping':<11}{'bound':<8}{'run':<10}{'found':>7}{'eff %':>8}{'load %':>9}")
    for scale in args.scales:
        t = time.time()
        cfg = load_config(f"case-study-{scale.replace('_', '-')}.json")
        backend = cfg.build_backend()
        oracle, _ = run_oracle(cfg.space, backend, cfg.budget_cap)
        for g, b, initial, iterative in run_sequential_grid(cfg, backend, args.jobs):
            for run, trace in (("initial", initial), ("iterative", iterative)):
                m = compute_metrics(trace.final, oracle, cfg.space, trace.raw_requests, trace.unique_evaluations)
                print(f"{scale:<11}{g.name:<11}{b.label:<8}{run:<10}"
                      f"{m.n_global_found:>4}/{len(oracle):<3}{percent(m.effectiveness):>7}"
                      f"{percent(m.computational_load, 2):>9}")
        print(f"# {scale}: {cfg.space.size} combinations, {len(oracle)} global optima, {time.time() - t:.1f}s")


if __name__ == "__main__":
    main()
