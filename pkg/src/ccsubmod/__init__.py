"""Chance-constrained monotone submodular optimization with Pareto-based
evolutionary algorithms, plus a max-coverage benchmark harness."""

from .algorithms import (
    Individual,
    ParetoArchive,
    RunConfig,
    RunResult,
    make_rng,
    run,
    run_gsemo,
    run_nsga2,
    run_sw_gsemo,
    sliding_selection,
    standard_bit_mutation,
)
from .chance import (
    Evaluator,
    G2Regime,
    Objectives,
    dominates,
    evaluate,
    expected_weight,
    surrogate_weight,
    weight_variance,
)
from .graphs import Graph, GraphFormatError, coverage_count, load_graph, save_edge_list
from .harness import (
    ExperimentConfig,
    emit_table,
    emit_trace,
    load_experiment_config,
    run_experiment,
    run_repetitions,
)
from .problem import (
    Instance,
    SurrogateKind,
    WeightModel,
    default_budgets,
    make_degree_weights,
    make_iid_weights,
    sample_weight_totals,
)
from .stats import kruskal_wallis, posthoc_marks

__version__ = "0.1.0"

__all__ = [
    "Individual",
    "ParetoArchive",
    "RunConfig",
    "RunResult",
    "make_rng",
    "run",
    "run_gsemo",
    "run_nsga2",
    "run_sw_gsemo",
    "sliding_selection",
    "standard_bit_mutation",
    "Evaluator",
    "G2Regime",
    "Objectives",
    "dominates",
    "evaluate",
    "expected_weight",
    "surrogate_weight",
    "weight_variance",
    "Graph",
    "GraphFormatError",
    "coverage_count",
    "load_graph",
    "save_edge_list",
    "ExperimentConfig",
    "emit_table",
    "emit_trace",
    "load_experiment_config",
    "run_experiment",
    "run_repetitions",
    "Instance",
    "SurrogateKind",
    "WeightModel",
    "default_budgets",
    "make_degree_weights",
    "make_iid_weights",
    "sample_weight_totals",
    "kruskal_wallis",
    "posthoc_marks",
    "__version__",
]
