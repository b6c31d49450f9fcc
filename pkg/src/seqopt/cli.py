"""Command-line entry point: ``seqopt <command> --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 budget refusal, 4 backend error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, ExperimentConfig, derive_seed, load_config
from .metrics import compute_metrics
from .morris import run_morris
from .nsga2 import BudgetRefused, GaConfig, repeated_run_protocol
from .objectives import BackendError, EvaluationLedger
from .sequential import BudgetExceeded
from .suite import (
    DegenerateBenchmark,
    _write_csv,
    export_report,
    run_oracle,
    run_sequential_grid,
    run_suite,
    write_pareto_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_BACKEND = 0, 2, 3, 4

log = logging.getLogger("seqopt")


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> ExperimentConfig:
    overrides = {"seed": args.seed, "jobs": args.jobs, "count_mode": args.count_mode}
    return load_config(args.config, overrides)


def cmd_validate(args) -> int:
    cfg = _load(args)
    meta = cfg.space.metadata
    print(f"{cfg.name}: ok")
    print(f"  variables: {len(cfg.space)}  combinations: {cfg.space.size}")
    if "stated_count" in meta and meta["stated_count"] != cfg.space.size:
        print(f"  note: documented count {meta['stated_count']} differs from computed {cfg.space.size}")
    print(f"  groupings: {', '.join(g.name for g in cfg.groupings)}")
    print(f"  bounds: {', '.join(b.label for b in cfg.bounds)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _load(args)
    backend = cfg.build_backend()
    front, n = run_oracle(cfg.space, backend, cfg.budget_cap)
    out = _out_dir(args, cfg)
    write_pareto_csv(out / "pareto_global.csv", cfg.space, front, backend.objective_names, front)
    print(f"evaluated {n} designs; {len(front)} global Pareto optima -> {out / 'pareto_global.csv'}")
    return EXIT_OK


def _select(cfg: ExperimentConfig, args) -> ExperimentConfig:
    groupings = tuple(g for g in cfg.groupings if not args.grouping or g.name in args.grouping)
    bounds = tuple(b for b in cfg.bounds if not args.bound or b.label in args.bound)
    if not groupings or not bounds:
        raise ConfigError("no grouping/bound left after --grouping/--bound filtering")
    return replace(cfg, groupings=groupings, bounds=bounds)


def cmd_sequential(args) -> int:
    cfg = _select(_load(args), args)
    backend = cfg.build_backend()
    out = _out_dir(args, cfg)
    for g, b, initial, iterative in run_sequential_grid(cfg, backend, cfg.jobs):
        for run, trace in (("initial", initial), ("iterative", iterative)):
            if trace is None:
                continue
            name = f"pareto_{g.name}_{b.label}_{run}.csv"
            write_pareto_csv(out / name, cfg.space, trace.final, backend.objective_names, None)
            print(
                f"{g.name:>10} {b.label:>7} {run:>9}: {len(trace.final):4d} solutions, "
                f"{trace.unique_evaluations} unique / {trace.raw_requests} raw evaluations"
            )
    return EXIT_OK


def cmd_nsga2(args) -> int:
    cfg = _select(_load(args), args)
    backend = cfg.build_backend()
    s = cfg.nsga2
    budget = args.budget if args.budget is not None else s.budget
    if budget is None:
        raise ConfigError("nsga2 budget is not set; pass --budget or use the suite command")
    global_set = None
    if args.with_oracle:
        global_set, _ = run_oracle(cfg.space, backend, cfg.budget_cap)
    out = _out_dir(args, cfg)
    rows = []
    for b in cfg.bounds:
        ga = GaConfig(
            population_size=s.population_size,
            crossover_prob=s.crossover_prob,
            mutation_rate=s.mutation_rate,
            budget=budget,
            seed=derive_seed(cfg.seed, "nsga2", b.label),
            bound=b,
            count_mode=cfg.count_mode,
        )
        proto = repeated_run_protocol(cfg.space, backend, ga, args.runs or s.runs, s.keep, global_set, cfg.jobs)
        kept = {r.seed for r in proto.kept}
        for r in proto.runs:
            m = compute_metrics(r.final, global_set, cfg.space, r.raw_requests, r.unique_evaluations, cfg.count_mode)
            rows.append([b.label, r.seed, budget, r.unique_evaluations, r.raw_requests, len(r.final),
                         m.n_global_found if global_set is not None else None, r.seed in kept])
            print(f"{b.label:>7} seed {r.seed}: {len(r.final)} solutions, {r.unique_evaluations} unique evaluations")
    _write_csv(out / "nsga2.csv", ["bound", "seed", "budget", "unique_evaluations", "raw_requests",
                                   "n_solutions", "n_global_found", "kept"], rows)
    return EXIT_OK


def cmd_morris(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    rows = []
    if cfg.morris is not None and cfg.morris.r > 0:
        res = run_morris(cfg.space, EvaluationLedger(cfg.build_backend()), cfg.morris)
        rows = res.rows()
        for v, o, mu, sd in rows:
            print(f"{v:>14} {o:>14}  mu*={mu:.6g}  sigma={sd:.6g}")
    _write_csv(out / "morris.csv", ["variable", "objective", "mu_star", "sigma"], rows)
    return EXIT_OK


def cmd_suite(args) -> int:
    cfg = _load(args)
    report = run_suite(cfg)
    out = _out_dir(args, cfg)
    export_report(report, out)
    print(f"wrote {len(report.rows)} sequential rows, {len(report.nsga)} NSGA-II groups to {out}")
    _print_tables(out)
    return EXIT_OK


def _print_tables(out: Path) -> None:
    for name in ("table5.csv", "table6.csv"):
        path = out / name
        if not path.exists():
            continue
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        print(f"\n{name}")
        header, body = rows[0], rows[1:]
        for k, col in enumerate(header):
            print(f"  {col:<22}" + "".join(f"{r[k]:>12}" for r in body))


def cmd_report(args) -> int:
    out = Path(args.out or ".")
    summary = out / "summary.json"
    if not summary.exists():
        raise ConfigError(f"no summary.json in {out}")
    data = json.loads(summary.read_text(encoding="utf-8"))
    o = data["oracle"]
    print(f"{data['name']}: {data['space']['size']} combinations, "
          f"{o['n_global_total'] if o['available'] else 'no'} global optima")
    for row in data["sequential"]:
        eff = row["effectiveness"]
        eff_s = "NA" if eff is None else f"{100 * eff:.1f}%"
        print(f"  {row['grouping']:>10} {row['bound']:>7} {row['run']:>9}: effectiveness {eff_s:>7}, "
              f"load {100 * row['computational_load']:.2f}%")
    for n in data["nsga2"]:
        eff = n["mean_effectiveness"]
        print(f"  nsga2 {n['bound']:>7}: budget {n['budget']}, mean effectiveness "
              f"{'NA' if eff is None else f'{100 * eff:.1f}%'}")
    _print_tables(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqopt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="experiment JSON (or name of a shipped config)")
        sp.add_argument("--seed", type=int, default=None, help="override the root seed")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--count-mode", choices=("unique", "raw"), default=None)
        return sp

    common(sub.add_parser("validate", help="check a config")).set_defaults(func=cmd_validate)
    common(sub.add_parser("oracle", help="full-factorial Pareto set")).set_defaults(func=cmd_oracle)
    sp = common(sub.add_parser("sequential", help="initial and iterative sequential runs"))
    sp.add_argument("--grouping", action="append")
    sp.add_argument("--bound", action="append")
    sp.set_defaults(func=cmd_sequential)
    sp = common(sub.add_parser("nsga2", help="repeated NSGA-II runs"))
    sp.add_argument("--grouping", action="append")
    sp.add_argument("--bound", action="append")
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--runs", type=int, default=None)
    sp.add_argument("--with-oracle", action="store_true", help="rank runs against the full-factorial set")
    sp.set_defaults(func=cmd_nsga2)
    common(sub.add_parser("morris", help="elementary-effects screening")).set_defaults(func=cmd_morris)
    common(sub.add_parser("suite", help="run everything and write the report")).set_defaults(func=cmd_suite)
    common(sub.add_parser("report", help="print a written report"), config_required=False).set_defaults(
        func=cmd_report
    )
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, BudgetRefused) as exc:
        print(f"budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (BackendError, DegenerateBenchmark) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
