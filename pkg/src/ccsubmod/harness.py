"""Experiment grids: run, persist, aggregate, and tabulate benchmark results.

A grid config (JSON) names instances (graph file plus weight/budget/alpha/
surrogate lists), algorithm templates, iteration budgets, and a repetition
count. Every (cell, repetition) produces one result file under
``<output_dir>/runs/``, so interrupted experiments resume by recomputing only
missing files. Aggregation writes ``results.json`` plus benchmark-style
comparison tables (``table.csv`` / ``table.md``) with Kruskal-Wallis gated,
Bonferroni-corrected pairwise marks.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import RunConfig, RunResult, Trace, run
from .chance import G2Regime
from .graphs import Graph, load_graph
from .problem import Instance, SurrogateKind, build_weights, default_budgets
from .stats import kruskal_wallis, posthoc_marks

__all__ = [
    "ExperimentConfig",
    "ResultSet",
    "run_experiment",
    "run_repetitions",
    "emit_table",
    "emit_trace",
    "load_experiment_config",
]

DEFAULT_REPETITIONS = 30


@dataclass(frozen=True)
class AlgorithmSpec:
    """One algorithm column of the experiment grid."""

    algorithm: str
    regime: str = "surrogate-g2"
    population: int = 20
    children: int = 10
    label: str = ""

    def resolved_label(self) -> str:
        if self.label:
            return self.label
        if self.algorithm == "nsga2":
            return f"NSGA-II-{self.population}"
        return self.algorithm.upper().replace("SW-", "SW-")


@dataclass(frozen=True)
class InstanceSpec:
    """One instance family: a graph with weight model and grid axes."""

    graph: str
    weights: str = "iid"
    a: int = 1
    d: float = 0.5
    budgets: tuple | str = "grid"
    alphas: tuple = (0.1, 0.001)
    surrogates: tuple = ("chebyshev", "chernoff")
    name: str = ""

    def resolved_name(self) -> str:
        return self.name or Path(self.graph).stem


@dataclass
class ExperimentConfig:
    instances: list[InstanceSpec]
    algorithms: list[AlgorithmSpec]
    t_max: list[int]
    repetitions: int = DEFAULT_REPETITIONS
    base_seed: int = 0
    output_dir: str = "results"
    name: str = "experiment"

    def validate(self) -> None:
        if not self.instances or not self.algorithms or not self.t_max:
            raise ValueError("experiment grid is empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    instances = [
        InstanceSpec(
            graph=str(_resolve_path(entry["graph"], path.parent)),
            weights=entry.get("weights", "iid"),
            a=entry.get("a", 1),
            d=entry.get("d", 0.5),
            budgets=tuple(entry["budgets"]) if isinstance(entry.get("budgets"), list) else entry.get("budgets", "grid"),
            alphas=tuple(entry.get("alphas", (0.1, 0.001))),
            surrogates=tuple(entry.get("surrogates", ("chebyshev", "chernoff"))),
            name=entry.get("name", ""),
        )
        for entry in doc["instances"]
    ]
    algorithms = [
        AlgorithmSpec(
            algorithm=entry["algorithm"],
            regime=entry.get("regime", "surrogate-g2"),
            population=entry.get("population", 20),
            children=entry.get("children", 10),
            label=entry.get("label", ""),
        )
        for entry in doc["algorithms"]
    ]
    cfg = ExperimentConfig(
        instances=instances,
        algorithms=algorithms,
        t_max=list(doc["t_max"]),
        repetitions=doc.get("repetitions", DEFAULT_REPETITIONS),
        base_seed=doc.get("base_seed", 0),
        output_dir=doc.get("output_dir", "results"),
        name=doc.get("name", path.stem),
    )
    cfg.validate()
    return cfg


def _resolve_path(p: str, base: Path) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


# ---------------------------------------------------------------------------
# Grid expansion and execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    index: int
    instance_name: str
    graph_path: str
    weights: str
    a: int
    d: float
    budget: float
    alpha: float
    surrogate: str
    t_max: int
    algo: AlgorithmSpec
    algo_index: int

    def cell_id(self) -> str:
        return (
            f"{self.instance_name}_{self.weights}_{self.surrogate}"
            f"_B{self.budget:g}_t{self.t_max}_a{self.alpha:g}"
            f"_{self.algo.resolved_label()}"
        )

    def row_key(self) -> tuple:
        return (
            self.instance_name,
            self.weights,
            self.surrogate,
            self.budget,
            self.t_max,
            self.alpha,
        )


@dataclass
class ResultSet:
    cells: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    executed_runs: int = 0
    algorithm_labels: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


_GRAPH_CACHE: dict[str, Graph] = {}


def _cached_graph(path: str) -> Graph:
    graph = _GRAPH_CACHE.get(path)
    if graph is None:
        graph = load_graph(path)
        _GRAPH_CACHE[path] = graph
    return graph


def _build_instance(cell: Cell) -> Instance:
    graph = _cached_graph(cell.graph_path)
    weights = build_weights(graph, cell.weights, a=cell.a, d=cell.d)
    return Instance(
        graph=graph,
        weights=weights,
        budget=cell.budget,
        alpha=cell.alpha,
        surrogate=SurrogateKind.parse(cell.surrogate),
        name=cell.instance_name,
    )


def _run_config(cell: Cell, seed: tuple[int, ...], trace: bool = False) -> RunConfig:
    return RunConfig(
        algorithm=cell.algo.algorithm,
        t_max=cell.t_max,
        seed=seed,
        regime=G2Regime.parse(cell.algo.regime),
        population=cell.algo.population,
        children=cell.algo.children,
        trace=trace,
    )


def _execute_task(task: tuple[Cell, int, int]) -> dict:
    """Run one (cell, repetition); returns a JSON-ready record."""
    cell, rep, base_seed = task
    instance = _build_instance(cell)
    cfg = _run_config(cell, (base_seed, cell.index, rep))
    result = run(instance, cfg)
    record = result.to_json_dict()
    record["cell_id"] = cell.cell_id()
    record["repetition"] = rep
    return record


def expand_cells(cfg: ExperimentConfig) -> tuple[list[Cell], list[dict]]:
    """Expansion order fixes each cell's index, which seeds its repetitions."""
    cells: list[Cell] = []
    errors: list[dict] = []
    index = 0
    for spec in cfg.instances:
        try:
            graph = _cached_graph(spec.graph)
        except Exception as exc:
            errors.append({"instance": spec.resolved_name(), "error": str(exc)})
            continue
        budgets = list(spec.budgets) if spec.budgets != "grid" else default_budgets(graph.n)
        for surrogate in spec.surrogates:
            for budget in budgets:
                for t_max in cfg.t_max:
                    for alpha in spec.alphas:
                        for algo_index, algo in enumerate(cfg.algorithms):
                            cells.append(
                                Cell(
                                    index=index,
                                    instance_name=spec.resolved_name(),
                                    graph_path=spec.graph,
                                    weights=spec.weights,
                                    a=spec.a,
                                    d=spec.d,
                                    budget=float(budget),
                                    alpha=float(alpha),
                                    surrogate=SurrogateKind.parse(surrogate).value,
                                    t_max=int(t_max),
                                    algo=algo,
                                    algo_index=algo_index,
                                )
                            )
                            index += 1
    return cells, errors


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("CCSUBMOD_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, (os.cpu_count() or 1) - 0)


def run_experiment(
    cfg: ExperimentConfig,
    workers: int | None = None,
    resume: bool = False,
    out_dir: str | Path | None = None,
    progress: bool = False,
) -> ResultSet:
    """Execute every (cell, repetition) of the grid and aggregate results.

    Existing per-run files are reused when ``resume`` is set. Failures are
    collected per run and never abort the rest of the grid.
    """
    cfg.validate()
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    cells, errors = expand_cells(cfg)
    result_set = ResultSet(errors=errors, algorithm_labels=[a.resolved_label() for a in cfg.algorithms])

    records: dict[tuple[int, int], dict] = {}
    pending: list[tuple[Cell, int, int]] = []
    for cell in cells:
        for rep in range(cfg.repetitions):
            run_file = runs_dir / f"{cell.cell_id()}__rep{rep}.json"
            if resume and run_file.exists():
                with open(run_file, "r", encoding="utf-8") as fh:
                    records[(cell.index, rep)] = json.load(fh)
            else:
                pending.append((cell, rep, cfg.base_seed))

    def _store(task: tuple[Cell, int, int], record: dict) -> None:
        cell, rep, _ = task
        records[(cell.index, rep)] = record
        run_file = runs_dir / f"{cell.cell_id()}__rep{rep}.json"
        with open(run_file, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=1, sort_keys=True)
        result_set.executed_runs += 1
        if progress:
            print(f"[{result_set.executed_runs}/{len(pending)}] {record['cell_id']} rep {rep}", file=sys.stderr)

    nworkers = _worker_count(workers)
    if nworkers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            for task, outcome in zip(pending, pool.map(_try_task, pending)):
                if "error" in outcome:
                    result_set.errors.append(outcome)
                else:
                    _store(task, outcome)
    else:
        for task in pending:
            outcome = _try_task(task)
            if "error" in outcome:
                result_set.errors.append(outcome)
            else:
                _store(task, outcome)

    for cell in cells:
        best = [records[(cell.index, r)]["best_g1"] for r in range(cfg.repetitions) if (cell.index, r) in records]
        entry = {
            "cell_id": cell.cell_id(),
            "instance": cell.instance_name,
            "weights": cell.weights,
            "surrogate": cell.surrogate,
            "B": cell.budget,
            "t_max": cell.t_max,
            "alpha": cell.alpha,
            "algorithm": cell.algo.resolved_label(),
            "algo_index": cell.algo_index,
            "row_key": list(cell.row_key()),
            "best_g1": best,
            "mean": float(np.mean(best)) if best else None,
            "std": float(np.std(best)) if best else None,
            "archive_sizes": [
                records[(cell.index, r)]["archive_size"]
                for r in range(cfg.repetitions)
                if (cell.index, r) in records
            ],
            "peak_archive_sizes": [
                records[(cell.index, r)]["peak_archive_size"]
                for r in range(cfg.repetitions)
                if (cell.index, r) in records
            ],
        }
        result_set.cells.append(entry)

    with open(out / "results.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "name": cfg.name,
                "repetitions": cfg.repetitions,
                "base_seed": cfg.base_seed,
                "algorithms": result_set.algorithm_labels,
                "cells": result_set.cells,
                "errors": result_set.errors,
            },
            fh,
            indent=1,
            sort_keys=True,
        )
    emit_table(result_set, out)
    return result_set


def _try_task(task: tuple[Cell, int, int]) -> dict:
    cell, rep, _ = task
    try:
        return _execute_task(task)
    except Exception as exc:
        return {"cell_id": cell.cell_id(), "repetition": rep, "error": f"{type(exc).__name__}: {exc}"}


# ---------------------------------------------------------------------------
# In-process repetition batches (used by tests and ad-hoc studies)
# ---------------------------------------------------------------------------

_WORKER_STATE: dict = {}


def _init_repetition_worker(instance: Instance, cfg_fields: dict) -> None:
    _WORKER_STATE["instance"] = instance
    _WORKER_STATE["cfg_fields"] = cfg_fields


def _run_repetition(args: tuple[int, tuple[int, ...]]) -> RunResult:
    rep, seed = args
    cfg = RunConfig(seed=seed, **_WORKER_STATE["cfg_fields"])
    return run(_WORKER_STATE["instance"], cfg)


def run_repetitions(
    instance: Instance,
    template: RunConfig,
    repetitions: int,
    base_seed: int,
    cell_index: int = 0,
    workers: int | None = None,
) -> list[RunResult]:
    """Repeat one configuration with seeds (base_seed, cell_index, rep)."""
    fields = {
        "algorithm": template.algorithm,
        "t_max": template.t_max,
        "regime": template.regime,
        "population": template.population,
        "children": template.children,
        "trace": template.trace,
    }
    tasks = [(rep, (base_seed, cell_index, rep)) for rep in range(repetitions)]
    nworkers = _worker_count(workers)
    if nworkers > 1 and repetitions > 1:
        with ProcessPoolExecutor(
            max_workers=nworkers,
            initializer=_init_repetition_worker,
            initargs=(instance, fields),
        ) as pool:
            return list(pool.map(_run_repetition, tasks))
    _init_repetition_worker(instance, fields)
    return [_run_repetition(task) for task in tasks]


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.3f}"


def emit_table(results: ResultSet, out_dir: str | Path) -> tuple[Path, Path]:
    """Write table.csv / table.md: one row per (instance, surrogate, B,
    t_max, alpha), one mean/std/stat column triple per algorithm.

    Stat marks are Kruskal-Wallis gated Bonferroni pairwise comparisons,
    rendered as "2(+),3(=)" strings against the 1-based algorithm indices.
    Missing cells render blank and produce a stderr warning.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = results.algorithm_labels
    k = len(labels)

    rows: dict[tuple, dict[int, dict]] = {}
    row_order: list[tuple] = []
    for cell in results.cells:
        key = tuple(cell["row_key"])
        if key not in rows:
            rows[key] = {}
            row_order.append(key)
        rows[key][cell["algo_index"]] = cell

    header = ["graph", "weights", "surrogate", "B", "t_max", "alpha"]
    for label in labels:
        header += [f"{label} mean", f"{label} std", f"{label} stat"]

    table_rows: list[list[str]] = []
    for key in row_order:
        by_algo = rows[key]
        missing = [i for i in range(k) if i not in by_algo or not by_algo[i]["best_g1"]]
        if missing:
            print(
                f"warning: row {key} missing algorithms {[labels[i] for i in missing]}",
                file=sys.stderr,
            )
        groups = [by_algo[i]["best_g1"] if i in by_algo else [] for i in range(k)]
        if all(groups) and k >= 2:
            marks = posthoc_marks(groups)
        else:
            marks = [["" for _ in range(k)] for _ in range(k)]
        row = [str(key[0]), str(key[1]), str(key[2]), _fmt(key[3]), str(key[4]), f"{key[5]:g}"]
        for i in range(k):
            if i in by_algo and by_algo[i]["best_g1"]:
                stat = ",".join(f"{j + 1}({marks[i][j]})" for j in range(k) if j != i and marks[i][j])
                row += [_fmt(by_algo[i]["mean"]), _fmt(by_algo[i]["std"]), stat]
            else:
                row += ["", "", ""]
        table_rows.append(row)

    csv_path = out_dir / "table.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(table_rows)

    md_path = out_dir / "table.md"
    with open(md_path, "w", encoding="utf-8") as fh:
        fh.write("| " + " | ".join(header) + " |\n")
        fh.write("|" + "---|" * len(header) + "\n")
        for row in table_rows:
            fh.write("| " + " | ".join(row) + " |\n")
    return csv_path, md_path


def emit_trace(result: RunResult, path: str | Path) -> Path:
    """Write a run's per-iteration trace as CSV.

    Columns: t, parent_g2, g1, g2, accepted, in_window, window_count. One
    row per iteration is enough to reconstruct both the accepted-offspring
    scatter and the window occupancy over time.
    """
    trace = result.trace
    if trace is None:
        raise ValueError("run has no trace; enable trace in the run config")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "parent_g2", "g1", "g2", "accepted", "in_window", "window_count"])
        for i in range(len(trace)):
            writer.writerow(
                [
                    i + 1,
                    repr(float(trace.parent_g2[i])),
                    repr(float(trace.g1[i])),
                    repr(float(trace.g2[i])),
                    int(trace.accepted[i]),
                    int(trace.in_window[i]),
                    int(trace.window_count[i]),
                ]
            )
    return path
