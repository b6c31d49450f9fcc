"""Batch driver: oracle, sequential grid, NSGA-II protocol, Morris, and report files."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, derive_seed
from .metrics import MetricsReport, compute_metrics, percent
from .morris import MorrisResult, run_morris
from .nsga2 import GaConfig, ProtocolResult, repeated_run_protocol
from .objectives import Backend, EvaluationLedger, SurrogateBackend, write_table_csv
from .pareto import ParetoSet
from .sequential import (
    BudgetExceeded,
    RunTrace,
    SequentialConfig,
    run_full_factorial,
    run_sequential,
)
from .space import DesignSpace

log = logging.getLogger(__name__)

RUNS = ("initial", "iterative")


class DegenerateBenchmark(RuntimeError):
    pass


@dataclass
class SequentialRow:
    grouping: str
    bound: str
    run: str
    trace: RunTrace
    metrics: MetricsReport

    @property
    def key(self) -> str:
        return f"{self.grouping}_{self.bound}_{self.run}"


@dataclass
class NsgaRow:
    bound: str
    budget: int
    protocol: ProtocolResult
    metrics: list[MetricsReport]  # one per run, in seed order

    @property
    def kept_seeds(self) -> list[int]:
        return [r.seed for r in self.protocol.kept]


@dataclass
class SuiteReport:
    config: ExperimentConfig
    global_set: ParetoSet | None
    oracle_evaluations: int
    oracle_note: str | None
    objective_names: tuple[str, ...]
    rows: list[SequentialRow]
    nsga: list[NsgaRow] = field(default_factory=list)
    morris: MorrisResult | None = None

    @property
    def space(self) -> DesignSpace:
        return self.config.space

    def row(self, grouping: str, bound: str, run: str) -> SequentialRow:
        for r in self.rows:
            if (r.grouping, r.bound, r.run) == (grouping, bound, run):
                return r
        raise KeyError((grouping, bound, run))


def _sequential_task(args):
    space, backend, grouping, bound, depth = args
    ledger = EvaluationLedger(backend)
    initial, iterative = run_sequential(SequentialConfig(space, grouping, bound, depth), ledger)
    return initial, iterative


def run_oracle(space: DesignSpace, backend: Backend, cap: int) -> tuple[ParetoSet, int]:
    ledger = EvaluationLedger(backend)
    front = run_full_factorial(space, ledger, cap)
    return front, ledger.unique_evaluations


def run_sequential_grid(config: ExperimentConfig, backend: Backend, jobs: int = 1):
    """Run every grouping x bound combination; returns [(grouping, bound, initial, iterative)]."""
    combos = [(g, b) for g in config.groupings for b in config.bounds]
    tasks = [(config.space, backend, g, b, config.iterative_depth) for g, b in combos]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sequential_task, tasks))
    else:
        results = [_sequential_task(t) for t in tasks]
    return [(g, b, ini, it) for (g, b), (ini, it) in zip(combos, results)]


def _nsga_budget(config: ExperimentConfig, rows: list[SequentialRow], bound: str) -> int:
    if config.nsga2.budget is not None:
        return config.nsga2.budget
    candidates = [r for r in rows if r.bound == bound]
    field_rows = [r for r in candidates if r.grouping == "field"]
    pick = field_rows or candidates
    last = [r for r in pick if r.run == "iterative"] or pick
    return max(r.trace.count(config.count_mode) for r in last)


def run_suite(config: ExperimentConfig, backend: Backend | None = None) -> SuiteReport:
    backend = backend or config.build_backend()
    space = config.space
    mode = config.count_mode

    global_set, oracle_evals, note = None, 0, None
    if config.full_factorial:
        try:
            global_set, oracle_evals = run_oracle(space, backend, config.budget_cap)
        except BudgetExceeded as exc:
            note = str(exc)
            log.warning("oracle skipped: %s", exc)
    else:
        note = "full factorial disabled"
    if global_set is not None and isinstance(backend, SurrogateBackend) and len(global_set) < 2:
        raise DegenerateBenchmark(f"surrogate Pareto front has {len(global_set)} point(s); objectives do not conflict")

    rows = []
    for g, b, initial, iterative in run_sequential_grid(config, backend, config.jobs):
        for run, trace in (("initial", initial), ("iterative", iterative)):
            if trace is None:
                continue
            m = compute_metrics(trace.final, global_set, space, trace.raw_requests, trace.unique_evaluations, mode)
            rows.append(SequentialRow(g.name, b.label, run, trace, m))

    nsga_rows = []
    if config.nsga2.enabled:
        s = config.nsga2
        for b in config.bounds:
            budget = max(_nsga_budget(config, rows, b.label), s.population_size)
            ga = GaConfig(
                population_size=s.population_size,
                crossover_prob=s.crossover_prob,
                mutation_rate=s.mutation_rate,
                budget=budget,
                seed=derive_seed(config.seed, "nsga2", b.label),
                bound=b,
                count_mode=mode,
            )
            proto = repeated_run_protocol(space, backend, ga, s.runs, s.keep, global_set, config.jobs)
            metrics = [
                compute_metrics(r.final, global_set, space, r.raw_requests, r.unique_evaluations, mode)
                for r in proto.runs
            ]
            nsga_rows.append(NsgaRow(b.label, budget, proto, metrics))

    morris = None
    if config.morris is not None and config.morris.r > 0:
        morris = run_morris(space, EvaluationLedger(backend), config.morris)

    return SuiteReport(config, global_set, oracle_evals, note, tuple(backend.objective_names), rows, nsga_rows, morris)


# -- export -----------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return "NA"
    return repr(float(x)) if isinstance(x, float) else str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_pareto_csv(path: Path, space: DesignSpace, front: ParetoSet, names, global_set: ParetoSet | None) -> None:
    gset = global_set.vector_set() if global_set is not None else None

    def classify(v):
        if gset is None:
            return "unknown"
        return "global" if v in gset else "search"

    write_table_csv(path, space, front.entries, names, extra={"classification": classify})


def _grid_columns(report: SuiteReport) -> list[tuple[str, str]]:
    cfg = report.config
    return [(g.name, b.label) for g in cfg.groupings for b in cfg.bounds]


def summary_dict(report: SuiteReport) -> dict:
    cfg = report.config
    space = report.space
    names = list(report.objective_names)
    out = {
        "name": cfg.name,
        "version": __version__,
        "seed": cfg.seed,
        "count_mode": cfg.count_mode,
        "objectives": names,
        "space": {
            "variables": list(space.names),
            "cardinalities": list(space.cardinalities),
            "size": space.size,
            "metadata": dict(space.metadata),
        },
        "oracle": {
            "available": report.global_set is not None,
            "note": report.oracle_note,
            "evaluations": report.oracle_evaluations,
            "n_global_total": None if report.global_set is None else len(report.global_set),
        },
        "sequential": [],
        "nsga2": [],
    }
    for r in report.rows:
        d = {"grouping": r.grouping, "bound": r.bound, "run": r.run}
        d.update(r.metrics.to_dict())
        d["passes"] = len(r.trace.passes)
        d["generated_count"] = r.trace.generated_count
        d["stage_counts"] = [[s.generated_count for s in p.stages] for p in r.trace.passes]
        out["sequential"].append(d)
    for n in report.nsga:
        runs = []
        for res, m in zip(n.protocol.runs, n.metrics):
            d = {"seed": res.seed, "generations": res.generations, "kept": res.seed in n.kept_seeds}
            d.update(m.to_dict())
            runs.append(d)
        effs = [m.effectiveness for m in n.metrics if m.effectiveness is not None]
        kept_effs = [m.effectiveness for res, m in zip(n.protocol.runs, n.metrics)
                     if res.seed in n.kept_seeds and m.effectiveness is not None]
        out["nsga2"].append({
            "bound": n.bound,
            "budget": n.budget,
            "mean_effectiveness": sum(effs) / len(effs) if effs else None,
            "kept_mean_effectiveness": sum(kept_effs) / len(kept_effs) if kept_effs else None,
            "runs": runs,
        })
    return out


def export_report(report: SuiteReport, out_dir) -> list[Path]:
    """Write the report files; identical reports produce byte-identical files.

    The wall-clock stamp goes to environment.json, the one non-reproducible file.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    space = report.space
    names = report.objective_names
    written = []

    def path(name):
        p = out / name
        written.append(p)
        return p

    if report.global_set is not None:
        write_pareto_csv(path("pareto_global.csv"), space, report.global_set, names, report.global_set)
    for r in report.rows:
        write_pareto_csv(path(f"pareto_{r.key}.csv"), space, r.trace.final, names, report.global_set)
    for n in report.nsga:
        for res in n.protocol.kept:
            write_pareto_csv(path(f"pareto_nsga2_{n.bound}_seed{res.seed}.csv"), space, res.final, names, report.global_set)

    with open(path("summary.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary_dict(report), fh, indent=2, sort_keys=False)
        fh.write("\n")

    cols = _grid_columns(report)
    header = ["run", "full_factorial"] + [f"{g}_{b}" for g, b in cols]
    n_total = None if report.global_set is None else len(report.global_set)
    t5, t6 = [], []
    for run in RUNS:
        row5, row6 = [run, n_total], [run, 100.0]
        present = False
        for g, b in cols:
            try:
                r = report.row(g, b, run)
            except KeyError:
                row5.append(None)
                row6.append(None)
                continue
            present = True
            row5.append(r.metrics.n_global_found if n_total is not None else None)
            row6.append(percent(r.metrics.computational_load))
        if present:
            t5.append(row5)
            t6.append(row6)
    _write_csv(path("table5.csv"), header, t5)
    _write_csv(path("table6.csv"), header, t6)

    diff_rows = []
    for r in report.rows:
        for d in r.metrics.differences:
            diff_rows.append(
                [r.key, " ".join(map(str, d.search)), " ".join(map(str, d.matched)), d.distance]
                + list(d.absolute) + list(d.percentage)
            )
    _write_csv(
        path("differences.csv"),
        ["config", "search_vector", "matched_global_vector", "distance"]
        + [f"abs_{n}" for n in names] + [f"pct_{n}" for n in names],
        diff_rows,
    )

    nsga_rows = []
    for n in report.nsga:
        for res, m in zip(n.protocol.runs, n.metrics):
            nsga_rows.append([n.bound, res.seed, n.budget, m.unique_evaluations, m.raw_requests,
                              m.n_global_found, m.effectiveness, res.seed in n.kept_seeds])
    _write_csv(path("nsga2.csv"),
               ["bound", "seed", "budget", "unique_evaluations", "raw_requests", "n_global_found",
                "effectiveness", "kept"], nsga_rows)

    morris_rows = [] if report.morris is None else report.morris.rows()
    _write_csv(path("morris.csv"), ["variable", "objective", "mu_star", "sigma"], morris_rows)

    with open(out / "environment.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({
            "version": __version__,
            "seed": report.config.seed,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }, fh, indent=2)
        fh.write("\n")
    return written
