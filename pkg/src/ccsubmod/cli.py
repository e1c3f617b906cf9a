"""Command-line interface.

Subcommands: inspect-graph, budgets, run, trace, experiment. Machine-readable
payloads (JSON, budget triples) go to stdout; diagnostics go to stderr. Exit
codes: 0 success, 1 runtime error, 2 configuration error, 3 experiment with
failed cells.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .algorithms import RunConfig, run
from .chance import G2Regime
from .graphs import GraphFormatError, load_graph
from .harness import emit_trace, load_experiment_config, run_experiment
from .problem import Instance, SurrogateKind, build_weights, default_budgets

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _add_instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--graph", required=True, help="edge-list or .mtx file")
    parser.add_argument("--format", default="auto", choices=["auto", "matrix-market", "edge-list"])
    parser.add_argument("--weights", default="iid", choices=["iid", "degree", "same-dispersion"])
    parser.add_argument("--a", type=int, default=1, help="shared expected weight (iid)")
    parser.add_argument("--d", type=float, default=0.5, help="dispersion")
    parser.add_argument("--B", type=float, required=True, help="weight budget")
    parser.add_argument("--alpha", type=float, required=True, help="tolerated violation probability")
    parser.add_argument(
        "--surrogate", default="chebyshev",
        choices=["cheb", "chern", "chebyshev", "chernoff"],
    )


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    _add_instance_flags(parser)
    parser.add_argument("--algo", required=True, choices=["gsemo", "sw-gsemo", "nsga2"])
    parser.add_argument("--tmax", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--regime", default="surrogate-g2",
        choices=["surrogate-g2", "expected-g2", "surrogate", "expected"],
    )
    parser.add_argument("--population", type=int, default=20, help="nsga2 population size")
    parser.add_argument("--children", type=int, default=10, help="nsga2 children per generation")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccsubmod",
        description="Chance-constrained monotone submodular optimization on graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect-graph", help="print graph summary as JSON")
    p.add_argument("--graph", required=True)
    p.add_argument("--format", default="auto", choices=["auto", "matrix-market", "edge-list"])

    p = sub.add_parser("budgets", help="print the three standard budgets for a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--format", default="auto", choices=["auto", "matrix-market", "edge-list"])

    p = sub.add_parser("run", help="single optimizer run; RunResult JSON on stdout")
    _add_run_flags(p)
    p.add_argument("--trace", metavar="CSV", default=None, help="also write a per-iteration trace CSV")

    p = sub.add_parser("trace", help="single run with mandatory trace output")
    _add_run_flags(p)
    p.add_argument("--out", required=True, metavar="CSV")

    p = sub.add_parser("experiment", help="run an experiment grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None, help="defaults to CCSUBMOD_WORKERS or CPU count")
    p.add_argument("--out", default=None, help="override the config's output_dir")
    p.add_argument("--resume", action="store_true", help="reuse existing per-run result files")
    p.add_argument("--progress", action="store_true")
    return parser


def _instance_from_args(args: argparse.Namespace) -> Instance:
    graph = load_graph(args.graph, format=args.format)
    weights = build_weights(graph, args.weights, a=args.a, d=args.d)
    return Instance(
        graph=graph,
        weights=weights,
        budget=args.B,
        alpha=args.alpha,
        surrogate=SurrogateKind.parse(args.surrogate),
        name=Path(args.graph).stem,
    )


def _cmd_single_run(args: argparse.Namespace, trace_path: str | None) -> int:
    instance = _instance_from_args(args)
    cfg = RunConfig(
        algorithm=args.algo,
        t_max=args.tmax,
        seed=args.seed,
        regime=G2Regime.parse(args.regime),
        population=args.population,
        children=args.children,
        trace=trace_path is not None,
    )
    result = run(instance, cfg)
    payload = result.to_json_dict()
    # The embedded config plus the graph path regenerate the run exactly.
    payload["config"]["graph"] = args.graph
    # stdout must be byte-identical for identical (flags, seed); timing goes
    # to stderr instead.
    del payload["wall_time_s"]
    print(f"run finished in {result.wall_time_s:.2f}s", file=sys.stderr)
    if trace_path is not None:
        emit_trace(result, trace_path)
        payload["trace_path"] = str(trace_path)
    json.dump(payload, sys.stdout, indent=1, sort_keys=True)
    print()
    return EXIT_OK


def _cmd_inspect(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, format=args.format)
    degrees = graph.degrees
    json.dump(
        {
            "path": args.graph,
            "n": graph.n,
            "edges": graph.num_edges,
            "degree_min": int(degrees.min()),
            "degree_max": int(degrees.max()),
            "degree_mean": float(degrees.mean()),
            "isolated": int((degrees == 0).sum()),
        },
        sys.stdout,
        indent=1,
        sort_keys=True,
    )
    print()
    return EXIT_OK


def _cmd_budgets(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, format=args.format)
    print(" ".join(str(b) for b in default_budgets(graph.n)))
    return EXIT_OK


def _cmd_experiment(args: argparse.Namespace) -> int:
    cfg = load_experiment_config(args.config)
    workers = args.workers
    if workers is None and os.environ.get("CCSUBMOD_WORKERS"):
        workers = int(os.environ["CCSUBMOD_WORKERS"])
    results = run_experiment(
        cfg, workers=workers, resume=args.resume, out_dir=args.out, progress=args.progress
    )
    if results.errors:
        for err in results.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "inspect-graph":
            return _cmd_inspect(args)
        if args.command == "budgets":
            return _cmd_budgets(args)
        if args.command == "run":
            return _cmd_single_run(args, args.trace)
        if args.command == "trace":
            return _cmd_single_run(args, args.out)
        if args.command == "experiment":
            return _cmd_experiment(args)
        parser.error(f"unknown command {args.command!r}")
    except (GraphFormatError, ValueError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
