"""Surrogate weights, bi-objective fitness, and Pareto dominance.

A selection x of elements with uniform weights has

    expected total   E(x) = sum of selected means
    total variance   V(x) = d^2 * |x| / 3

and its chance constraint Pr[W(x) > B] <= alpha is certified through one of
two deterministic surrogate weights:

    chebyshev:  E(x) + sqrt((1 - alpha) * V(x) / alpha)
    chernoff:   E(x) + sqrt(3 * d * |x| * ln(1/alpha))

A surrogate weight within the budget implies the chance constraint holds.

The fitness of x is the pair (g1, g2): g1 is the coverage value, replaced by
the sentinel -1 whenever the surrogate weight exceeds the budget; g2 is the
constraint-side objective, either the surrogate weight itself
(``surrogate-g2``) or the expected weight (``expected-g2``, the variant used
with per-element means). Feasibility, i.e. the g1 sentinel, is always judged
against the surrogate weight, in both regimes.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .graphs import coverage_of_indices
from .problem import Instance, SurrogateKind, WeightModel

__all__ = [
    "G2Regime",
    "Objectives",
    "expected_weight",
    "weight_variance",
    "surrogate_weight",
    "evaluate",
    "dominates",
    "Evaluator",
]

INFEASIBLE_G1 = -1.0


class G2Regime(enum.Enum):
    """Which quantity serves as the second (minimized) objective."""

    SURROGATE = "surrogate-g2"
    EXPECTED = "expected-g2"

    @classmethod
    def parse(cls, name: str) -> "G2Regime":
        aliases = {"surrogate": cls.SURROGATE, "expected": cls.EXPECTED}
        name = name.strip().lower()
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown g2 regime {name!r}") from None


class Objectives(NamedTuple):
    g1: float
    g2: float


def _check_length(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (n,):
        raise ValueError(f"bit vector length {x.shape} != model size {n}")
    return x


def expected_weight(x: np.ndarray, model: WeightModel) -> float:
    """Sum of expected weights over selected elements."""
    x = _check_length(x, model.n)
    return float(model.expected[np.flatnonzero(x)].sum())


def weight_variance(x: np.ndarray, model: WeightModel) -> float:
    """Variance of the selection total: d^2 * |x| / 3 (uniform weights)."""
    x = _check_length(x, model.n)
    k = int(np.count_nonzero(x))
    return model.dispersion**2 * k / 3.0


def _tail_coefficient(model: WeightModel, alpha: float, kind: SurrogateKind) -> float:
    """c such that the surrogate equals E(x) + c * sqrt(|x|)."""
    d = model.dispersion
    if kind is SurrogateKind.CHEBYSHEV:
        return math.sqrt((1.0 - alpha) * d * d / (3.0 * alpha))
    # ln(1/alpha) computed as -ln(alpha)
    return math.sqrt(3.0 * d * -math.log(alpha))


def surrogate_weight(
    x: np.ndarray, model: WeightModel, alpha: float, kind: SurrogateKind
) -> float:
    """Deterministic-equivalent weight of a selection at confidence alpha.

    Strictly increasing in the selection size for fixed means (d > 0) and
    equal to the expected weight (0) for the empty selection.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    x = _check_length(x, model.n)
    idx = np.flatnonzero(x)
    e = float(model.expected[idx].sum())
    return e + _tail_coefficient(model, alpha, kind) * math.sqrt(len(idx))


def evaluate(x: np.ndarray, instance: Instance, regime: G2Regime = G2Regime.SURROGATE) -> Objectives:
    """Bi-objective fitness of a selection under an instance.

    g1 is the coverage value, or -1 when the surrogate weight exceeds the
    budget. g2 is the surrogate weight (``SURROGATE`` regime) or the expected
    weight (``EXPECTED`` regime); the -1 sentinel is driven by the surrogate
    weight in both regimes.
    """
    return Evaluator(instance, regime).evaluate_bits(x)


def dominates(a: Objectives, b: Objectives, strict: bool = False) -> bool:
    """Weak dominance: g1(a) >= g1(b) and g2(a) <= g2(b); strict adds inequality."""
    weak = a.g1 >= b.g1 and a.g2 <= b.g2
    if not strict:
        return weak
    return weak and (a.g1 > b.g1 or a.g2 < b.g2)


class Evaluator:
    """Per-(instance, regime) fitness evaluator with precomputed constants.

    The evaluation count is the budget currency of every optimizer run, so
    this object also tracks how many selections it has scored. Coverage is
    only computed for feasible selections; infeasible ones short-circuit to
    the sentinel.
    """

    def __init__(self, instance: Instance, regime: G2Regime = G2Regime.SURROGATE):
        self.instance = instance
        self.regime = regime
        self.graph = instance.graph
        self.model = instance.weights
        self.budget = float(instance.budget)
        self.tail_coefficient = _tail_coefficient(
            instance.weights, instance.alpha, instance.surrogate
        )
        self.evaluations = 0

    def surrogate_from(self, expected: float, size: int) -> float:
        return expected + self.tail_coefficient * math.sqrt(size)

    def evaluate_from_stats(self, bits: np.ndarray, size: int, expected: float) -> Objectives:
        """Score a selection whose size and expected weight are already known.

        ``expected`` must equal the exact integer sum of selected means (the
        optimizers maintain it incrementally; integer arithmetic in float64
        keeps it exact).
        """
        self.evaluations += 1
        sg = self.surrogate_from(expected, size)
        if sg > self.budget:
            g1 = INFEASIBLE_G1
        else:
            g1 = float(coverage_of_indices(self.graph, np.flatnonzero(bits)))
        g2 = sg if self.regime is G2Regime.SURROGATE else expected
        return Objectives(g1, g2)

    def evaluate_bits(self, x: np.ndarray) -> Objectives:
        x = _check_length(x, self.model.n)
        idx = np.flatnonzero(x)
        return self.evaluate_from_stats(x, len(idx), float(self.model.expected[idx].sum()))
