"""Problem instances: stochastic weight models bound to a graph and budget.

Element weights are uniform on ``[a_i - d, a_i + d]`` with integer means.
Two models are supported: identical means for every element ("iid") and
per-element means equal to degree+1 with a shared dispersion ("degree").
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graphs import Graph, load_graph

__all__ = [
    "WeightKind",
    "SurrogateKind",
    "WeightModel",
    "Instance",
    "make_iid_weights",
    "make_degree_weights",
    "default_budgets",
    "sample_weight_totals",
]


class WeightKind(enum.Enum):
    IID = "iid"
    SAME_DISPERSION = "same-dispersion"


class SurrogateKind(enum.Enum):
    """Which tail bound turns the chance constraint into a deterministic weight."""

    CHEBYSHEV = "chebyshev"
    CHERNOFF = "chernoff"

    @classmethod
    def parse(cls, name: str) -> "SurrogateKind":
        aliases = {"cheb": cls.CHEBYSHEV, "chern": cls.CHERNOFF}
        name = name.strip().lower()
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown surrogate kind {name!r}") from None


@dataclass(frozen=True)
class WeightModel:
    """Per-element integer expected weights plus a shared dispersion d.

    Invariants: every expected weight is a positive integer and
    ``0 < d <= min(expected)``, so sampled weights stay non-negative.
    """

    kind: WeightKind
    expected: np.ndarray = field(repr=False)
    dispersion: float

    def __post_init__(self) -> None:
        expected = np.ascontiguousarray(self.expected, dtype=np.int64)
        expected.setflags(write=False)
        object.__setattr__(self, "expected", expected)
        if expected.ndim != 1 or expected.size == 0:
            raise ValueError("expected weights must be a non-empty vector")
        if expected.min() < 1:
            raise ValueError("expected weights must be positive integers")
        if not (0.0 < self.dispersion <= float(expected.min())):
            raise ValueError(
                f"dispersion d={self.dispersion} outside (0, {int(expected.min())}]"
            )

    @property
    def n(self) -> int:
        return int(self.expected.size)

    @property
    def uniform_mean(self) -> int | None:
        """The shared mean a for iid models, else None."""
        return int(self.expected[0]) if self.kind is WeightKind.IID else None


def make_iid_weights(n: int, a: int, d: float) -> WeightModel:
    """Model with the same integer mean ``a`` for all n elements; 0 < d <= a."""
    if n < 1:
        raise ValueError("n must be positive")
    if int(a) != a or a < 1:
        raise ValueError("a must be a positive integer")
    return WeightModel(WeightKind.IID, np.full(n, int(a), dtype=np.int64), float(d))


def make_degree_weights(graph: Graph, d: float) -> WeightModel:
    """Model with mean degree(v)+1 per node and shared dispersion d.

    d = 1 is always valid because degree(v)+1 >= 1.
    """
    return WeightModel(WeightKind.SAME_DISPERSION, graph.degrees + 1, float(d))


def default_budgets(n: int) -> list[int]:
    """The three standard budgets for an n-node instance.

    ``[floor(sqrt(n)), n // 20, n // 10]``; the square root is truncated,
    which is what reproduces the published budget grids (e.g. 1882 -> 43).
    """
    if n < 1:
        raise ValueError("n must be positive")
    return [math.isqrt(n), n // 20, n // 10]


@dataclass(frozen=True)
class Instance:
    """A chance-constrained max-coverage instance.

    Feasibility of a selection is certified by comparing its surrogate weight
    (see :mod:`ccsubmod.chance`) against the budget ``B`` at violation
    probability ``alpha``.
    """

    graph: Graph
    weights: WeightModel
    budget: float
    alpha: float
    surrogate: SurrogateKind
    name: str = ""

    def __post_init__(self) -> None:
        if self.weights.n != self.graph.n:
            raise ValueError("weight model size does not match graph size")
        if not self.budget > 0:
            raise ValueError("budget B must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")


def sample_weight_totals(
    model: WeightModel,
    selection: np.ndarray,
    rng: np.random.Generator,
    samples: int,
) -> np.ndarray:
    """Monte-Carlo totals of the stochastic weight of a selection.

    Each selected element draws from the continuous uniform on
    ``[a_i - d, a_i + d]``; returns ``samples`` independent totals.
    """
    selection = np.asarray(selection)
    if selection.shape != (model.n,):
        raise ValueError("selection length mismatch")
    idx = np.flatnonzero(selection)
    base = float(model.expected[idx].sum())
    if len(idx) == 0:
        return np.zeros(samples)
    noise = rng.uniform(-model.dispersion, model.dispersion, size=(samples, len(idx)))
    return base + noise.sum(axis=1)


# ---------------------------------------------------------------------------
# Instance config files: small JSON documents with paths and scalars, kept
# version-controllable for reproducible experiment definitions.
# ---------------------------------------------------------------------------

def build_weights(graph: Graph, kind: str, a: int = 1, d: float = 0.5) -> WeightModel:
    """Construct a weight model from config-file fields."""
    kind = kind.strip().lower()
    if kind == "iid":
        return make_iid_weights(graph.n, a, d)
    if kind in ("degree", "same-dispersion"):
        return make_degree_weights(graph, d)
    raise ValueError(f"unknown weight kind {kind!r}")


def expand_instance_config(path: str | Path) -> list[Instance]:
    """Load a JSON instance config, expanding ``"B": "grid"`` to the three
    standard budgets.

    Fields: graph (path), weights ("iid"|"degree"), a, d, B (number or
    "grid"), alpha, surrogate ("chebyshev"|"chernoff"). Paths are resolved
    relative to the config file.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    graph_path = Path(doc["graph"])
    if not graph_path.is_absolute():
        graph_path = path.parent / graph_path
    graph = load_graph(graph_path)
    weights = build_weights(graph, doc["weights"], a=doc.get("a", 1), d=doc.get("d", 0.5))
    raw_budget = doc["B"]
    budgets = default_budgets(graph.n) if raw_budget == "grid" else [float(raw_budget)]
    return [
        Instance(
            graph=graph,
            weights=weights,
            budget=float(budget),
            alpha=float(doc["alpha"]),
            surrogate=SurrogateKind.parse(doc.get("surrogate", "chebyshev")),
            name=doc.get("name", graph_path.stem),
        )
        for budget in budgets
    ]


def load_instance_config(path: str | Path) -> Instance:
    """Load a JSON config that pins a single budget (see
    :func:`expand_instance_config` for the ``"grid"`` form)."""
    instances = expand_instance_config(path)
    if len(instances) != 1:
        raise ValueError('config uses B = "grid"; use expand_instance_config')
    return instances[0]
