"""Minimal-posterior-risk uncertainty: ``H(nu) = inf_d integral L(y, d) dnu``.

Losses may take the value ``+inf``.  The extended product uses the
convention ``inf * 0 = 0``, implemented explicitly rather than through
floating-point arithmetic (which would produce NaN).  Attained minima give
the associated negatively-oriented proper scoring rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .measures import Atomic, DiscreteMeasure, Outcome, as_outcome

PROPRIETY_TOL = 1e-10


def extended_expectation(losses: Sequence[float], weights: Sequence[float]) -> float:
    """``sum_k w_k * l_k`` with ``inf * 0 = 0`` and ``inf * p = inf`` for p > 0."""
    total = 0.0
    for l, w in zip(losses, weights):
        if w == 0.0:
            continue
        if math.isinf(l):
            return math.inf
        total += w * l
    return total


class LossSpec:
    """Base class for loss structures defining an expected-loss functional."""

    name: str = "loss"

    def to_json(self) -> dict:
        raise ValidationError(f"{self.name} loss is not JSON-serializable")


@dataclass(frozen=True)
class ZeroOne(LossSpec):
    """Decisions are outcomes, ``L(y, d) = 1 if y != d``; H is the Bayes error."""

    name: str = "zero_one"

    def to_json(self):
        return {"loss": "zero_one"}


@dataclass(frozen=True)
class QuadraticScalar(LossSpec):
    """Real decisions with squared-error loss; H is the variance, the mean decides."""

    name: str = "quadratic"

    def to_json(self):
        return {"loss": "quadratic"}


@dataclass(frozen=True)
class FiniteTable(LossSpec):
    """Explicit loss table over finite outcome and decision sets.

    Entries are extended nonnegative reals (``+inf`` allowed).  The
    functional is an uncertainty functional exactly when every row minimum
    is zero, which :meth:`is_uncertainty_functional` reports.
    """

    outcomes: tuple[Outcome, ...]
    decisions: tuple[str, ...]
    table: tuple[tuple[float, ...], ...]
    name: str = "table"

    def __post_init__(self):
        if not self.outcomes or not self.decisions:
            raise ValidationError("loss table needs outcomes and decisions")
        if len(self.table) != len(self.outcomes):
            raise ValidationError("one table row per outcome is required")
        for row in self.table:
            if len(row) != len(self.decisions):
                raise ValidationError("one table column per decision is required")
            for entry in row:
                if not (entry >= 0.0):
                    raise ValidationError(f"loss entries must be nonnegative, got {entry!r}")

    @staticmethod
    def from_arrays(outcomes, decisions, table) -> "FiniteTable":
        outs = tuple(as_outcome(y) for y in outcomes)
        rows = tuple(tuple(float(v) for v in row) for row in table)
        return FiniteTable(outcomes=outs, decisions=tuple(str(d) for d in decisions),
                           table=rows)

    def row_minima(self) -> tuple[float, ...]:
        return tuple(min(row) for row in self.table)

    def is_uncertainty_functional(self) -> bool:
        return all(m == 0.0 for m in self.row_minima())

    def to_json(self):
        return {"loss": {"table": {
            "outcomes": [_outcome_json(y) for y in self.outcomes],
            "decisions": list(self.decisions),
            "L": [["inf" if math.isinf(v) else v for v in row] for row in self.table]}}}


def _outcome_json(y):
    from .measures import outcome_to_json
    return outcome_to_json(y)


def loss_from_json(obj: Mapping) -> LossSpec:
    spec = obj.get("loss")
    if spec == "zero_one":
        return ZeroOne()
    if spec == "quadratic":
        return QuadraticScalar()
    if isinstance(spec, Mapping) and "table" in spec:
        tb = spec["table"]
        from .measures import outcome_from_json
        table = [[math.inf if v == "inf" else float(v) for v in row] for row in tb["L"]]
        return FiniteTable.from_arrays(
            [outcome_from_json(y) for y in tb["outcomes"]], tb["decisions"], table)
    raise ValidationError(f"unknown loss spec {obj!r}")


@dataclass(frozen=True)
class ExpectedLossResult:
    value: float
    argmin: object  # decision label, outcome, or real number


def expected_loss_value(loss: LossSpec, measure: DiscreteMeasure | Atomic) -> ExpectedLossResult:
    """Minimal expected loss and a minimizing decision.

    Finite decision sets are minimized by enumeration, ties broken by lowest
    decision index; the quadratic case has the analytic minimizer (mean) and
    value (variance).
    """
    if isinstance(measure, Atomic):
        measure = measure.measure

    if isinstance(loss, QuadraticScalar):
        values = np.array([_require_scalar(y) for y in measure.outcomes])
        w = measure.weights
        mean = float(np.dot(w, values))
        var = float(np.dot(w, (values - mean) ** 2))
        return ExpectedLossResult(value=var, argmin=mean)

    if isinstance(loss, ZeroOne):
        # risk of deciding d is 1 - nu({d}); the mode minimizes, first in
        # canonical order on ties
        best_y, best_w = measure.atoms[0]
        for y, w in measure.atoms[1:]:
            if w > best_w:
                best_y, best_w = y, w
        return ExpectedLossResult(value=1.0 - best_w, argmin=best_y)

    if isinstance(loss, FiniteTable):
        index = {y: i for i, y in enumerate(loss.outcomes)}
        try:
            rows = [index[y] for y in measure.outcomes]
        except KeyError as exc:
            raise DomainError(f"outcome {exc.args[0]!r} not covered by the loss table")
        w = measure.weights
        best_value, best_d = math.inf, None
        for d, label in enumerate(loss.decisions):
            risk = extended_expectation([loss.table[r][d] for r in rows], w)
            if risk < best_value:
                best_value, best_d = risk, label
        if best_d is None:  # every decision has infinite risk
            best_d = loss.decisions[0]
        return ExpectedLossResult(value=best_value, argmin=best_d)

    raise ValidationError(f"unknown loss spec {loss!r}")


def _require_scalar(y) -> float:
    if not isinstance(y, float):
        raise DomainError("the quadratic loss is defined on real scalar outcomes")
    return y


@dataclass(frozen=True)
class ScoringRuleView:
    """Scoring rule ``S(y, nu) = L(y, d*(nu))`` built from the attained minimum.

    Negatively oriented and proper: forecasting the true measure minimizes
    the expected score, and the attained expected score is the functional.
    """

    loss: LossSpec

    def decision(self, measure: DiscreteMeasure | Atomic):
        return expected_loss_value(self.loss, measure).argmin

    def score(self, y, forecast: DiscreteMeasure | Atomic) -> float:
        d = self.decision(forecast)
        y = as_outcome(y)
        if isinstance(self.loss, QuadraticScalar):
            return (_require_scalar(y) - d) ** 2
        if isinstance(self.loss, ZeroOne):
            return 0.0 if y == d else 1.0
        table: FiniteTable = self.loss
        col = table.decisions.index(d)
        try:
            row = table.outcomes.index(y)
        except ValueError:
            raise DomainError(f"outcome {y!r} not covered by the loss table")
        return table.table[row][col]

    def expected_score(self, forecast, actual: DiscreteMeasure | Atomic) -> float:
        if isinstance(actual, Atomic):
            actual = actual.measure
        scores = [self.score(y, forecast) for y in actual.outcomes]
        return extended_expectation(scores, actual.weights)


def scoring_rule_view(loss: LossSpec) -> ScoringRuleView:
    return ScoringRuleView(loss=loss)
