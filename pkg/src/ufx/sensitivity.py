"""First-order sensitivity indices for arbitrary uncertainty functionals.

The index of input ``X_j`` is the normalized expected reduction of
uncertainty in the output from learning ``X_j``:

    S_j = (H(law of Y) - E[H(law of Y given X_j)]) / H(law of Y).

On finite joints everything is enumerated exactly.  On data, conditional
laws are estimated by equal-frequency binning of each real input (exact
group-by for categorical inputs), evaluating the functional on the bin-level
empirical measures; this is the plain plug-in estimator, not a bias-corrected
one, and reports carry (n, bins) so callers can refine.

``SensitivityAnalyzer`` wraps the sample path as a scikit-learn estimator so
the indices compose with the wider ecosystem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, column_or_1d

from .errors import (BinningError, DegenerateOutputError, ValidationError)
from .harness import FunctionalHandle, JointPmf
from .measures import Atomic, Category, empirical_measure

DEGENERATE_TOL = 1e-12
DEFAULT_SEED = 0xDEC0DE


@dataclass(frozen=True)
class Column:
    """One typed data column: 64-bit reals or interned categorical ids."""

    name: str
    kind: str  # "real" | "categorical"
    values: np.ndarray
    labels: tuple[str, ...] | None = None  # id -> original token

    def __post_init__(self):
        if self.kind not in ("real", "categorical"):
            raise ValidationError(f"unknown column kind {self.kind!r}")
        if self.values.ndim != 1:
            raise ValidationError("columns are one-dimensional")
        if self.kind == "real" and not np.all(np.isfinite(self.values)):
            raise ValidationError(f"column {self.name!r} contains non-finite values")


@dataclass(frozen=True)
class Dataset:
    """n rows of d typed inputs plus one output column."""

    inputs: tuple[Column, ...]
    output: Column

    def __post_init__(self):
        names = [c.name for c in self.inputs] + [self.output.name]
        if len(set(names)) != len(names):
            raise ValidationError("column names must be unique")
        if self.n < 2:
            raise ValidationError("a dataset needs at least two rows")
        for c in self.inputs:
            if len(c.values) != self.n:
                raise ValidationError("all columns must have equal length")

    @property
    def n(self) -> int:
        return len(self.output.values)

    def output_outcomes(self) -> list:
        if self.output.kind == "categorical":
            return [Category(int(v)) for v in self.output.values]
        return [float(v) for v in self.output.values]


@dataclass(frozen=True)
class IndexEntry:
    input: str
    S: float
    numerator: float

    def to_json(self) -> dict:
        return {"input": self.input, "S": self.S, "numerator": self.numerator}


@dataclass(frozen=True)
class SensitivityReport:
    indices: tuple[IndexEntry, ...]
    H_total: float
    meta: dict

    def to_json(self) -> dict:
        return {"indices": [e.to_json() for e in self.indices],
                "H_total": self.H_total,
                "meta": self.meta}


def _evaluate_group(handle: FunctionalHandle, outcomes: Sequence) -> float:
    if handle.evaluate_samples is not None:
        return handle.evaluate_samples(outcomes)
    return handle.evaluate(Atomic(empirical_measure(outcomes)))


def sensitivity_exact_discrete(handle: FunctionalHandle,
                               joints: Mapping[str, JointPmf]) -> SensitivityReport:
    """Exact indices from finite joint pmfs, one per input.

    Marginalization, conditioning, and both functional evaluations are
    enumerated; nothing is estimated.
    """
    entries = []
    h_total = None
    for name, joint in joints.items():
        marginal = Atomic(joint.marginal_y())
        h_y = handle.evaluate(marginal)
        if h_total is None:
            h_total = h_y
        if h_y < DEGENERATE_TOL:
            raise DegenerateOutputError(
                f"total uncertainty {h_y!r} is numerically zero; the "
                "normalized index is undefined")
        expected = sum(px * handle.evaluate(Atomic(cond))
                       for px, cond in joint.conditionals())
        numerator = h_y - expected
        entries.append(IndexEntry(input=name, S=numerator / h_y, numerator=numerator))
    return SensitivityReport(indices=tuple(entries), H_total=float(h_total),
                             meta={"path": "exact_discrete",
                                   "functional": dict(handle.spec or {"name": handle.name})})


def _equal_frequency_groups(values: np.ndarray, bins: int) -> list[np.ndarray]:
    """Row indices split into ``bins`` groups of nearly equal size.

    Rows are ordered by value with a stable sort, so ties are broken by the
    original row order and the split is deterministic.
    """
    order = np.argsort(values, kind="stable")
    return [g for g in np.array_split(order, bins) if len(g) > 0]


def _categorical_groups(values: np.ndarray) -> list[np.ndarray]:
    groups = []
    for v in np.unique(values):
        groups.append(np.nonzero(values == v)[0])
    return groups


def _resolve_bins(bins, n: int) -> int:
    if bins in (None, "auto"):
        return max(2, int(math.isqrt(n)))
    b = int(bins)
    if b < 2:
        raise ValidationError("at least two bins are required")
    return b


def sensitivity_from_samples(handle: FunctionalHandle, data: Dataset,
                             bins="auto", rng_seed: int = DEFAULT_SEED,
                             min_bin_count: int = 2) -> SensitivityReport:
    """Plug-in indices from data via equal-frequency conditional binning."""
    n = data.n
    n_bins = _resolve_bins(bins, n)
    if n < 2 * min_bin_count:
        raise ValidationError(f"need at least {2 * min_bin_count} rows")

    outcomes = data.output_outcomes()
    h_total = _evaluate_group(handle, outcomes)
    if h_total < DEGENERATE_TOL:
        raise DegenerateOutputError(
            f"total uncertainty {h_total!r} is numerically zero; the "
            "normalized index is undefined")

    entries = []
    for col in data.inputs:
        if col.kind == "categorical":
            groups = _categorical_groups(col.values)
        else:
            groups = _equal_frequency_groups(col.values, n_bins)
        small = [g for g in groups if len(g) < min_bin_count]
        if small:
            raise BinningError(
                f"input {col.name!r} produced a conditioning group with fewer "
                f"than {min_bin_count} rows; reduce the bin count")
        expected = 0.0
        for g in groups:
            h_g = _evaluate_group(handle, [outcomes[i] for i in g])
            expected += (len(g) / n) * h_g
        numerator = h_total - expected
        entries.append(IndexEntry(input=col.name, S=numerator / h_total,
                                  numerator=numerator))

    meta = {"path": "samples", "n": n, "bins": n_bins, "seed": rng_seed,
            "min_bin_count": min_bin_count,
            "functional": dict(handle.spec or {"name": handle.name})}
    return SensitivityReport(indices=tuple(entries), H_total=h_total, meta=meta)


def sobol_variance_shortcut(data: Dataset, bins="auto",
                            rng_seed: int = DEFAULT_SEED,
                            min_bin_count: int = 2) -> SensitivityReport:
    """Classical variance-based indices through the same binning pipeline.

    Uses the unbiased sample variance directly; must agree with the
    half-squared-difference kernel functional to within rounding, which the
    test suite uses as a consistency oracle.
    """
    def measure_variance(mr) -> float:
        values = np.array(mr.measure.outcomes, dtype=float)
        w = mr.measure.weights
        mean = float(np.dot(w, values))
        return float(np.dot(w, (values - mean) ** 2))

    handle = FunctionalHandle(
        name="variance",
        evaluate=measure_variance,
        evaluate_samples=lambda ys: float(np.var(np.asarray(ys, dtype=float), ddof=1)),
        spec={"variance": "u_stat"})
    if data.output.kind != "real":
        raise ValidationError("variance-based indices need a real output")
    return sensitivity_from_samples(handle, data, bins=bins, rng_seed=rng_seed,
                                    min_bin_count=min_bin_count)


class SensitivityAnalyzer(BaseEstimator):
    """Scikit-learn estimator computing first-order uncertainty indices.

    Parameters
    ----------
    functional : dict, optional
        Functional spec, e.g. ``{"kernel": "squared_half"}`` (the default,
        classical variance-based indices), ``{"phi": "gini_simpson"}``, or
        ``{"loss": "zero_one"}``.
    bins : "auto" or int
        Number of equal-frequency bins per real input; "auto" uses
        ``floor(sqrt(n))``.
    categorical_features : sequence of int
        Column indices of X to treat as categorical (exact group-by).
    categorical_output : bool
        Treat y as categorical labels instead of reals.
    seed : int
        Recorded in the report; the pipeline itself is deterministic.

    Attributes
    ----------
    indices_ : ndarray of shape (d,)
        First-order index per input column.
    report_ : SensitivityReport
        Full report with numerators and metadata.
    """

    def __init__(self, functional=None, bins="auto", categorical_features=(),
                 categorical_output=False, seed=DEFAULT_SEED):
        self.functional = functional
        self.bins = bins
        self.categorical_features = categorical_features
        self.categorical_output = categorical_output
        self.seed = seed

    def fit(self, X, y):
        from .registry import functional_from_spec

        X = check_array(X, dtype="numeric", ensure_2d=True)
        y = column_or_1d(y)
        if len(y) != X.shape[0]:
            raise ValidationError("X and y must have the same number of rows")

        spec = self.functional if self.functional is not None else {"kernel": "squared_half"}
        handle = functional_from_spec(spec)

        categorical = set(int(i) for i in self.categorical_features)
        cols = []
        for j in range(X.shape[1]):
            kind = "categorical" if j in categorical else "real"
            values = X[:, j].astype(int) if kind == "categorical" else X[:, j]
            cols.append(Column(name=f"x{j + 1}", kind=kind, values=np.asarray(values)))
        out_kind = "categorical" if self.categorical_output else "real"
        y_values = _intern_output(y) if self.categorical_output else np.asarray(y, dtype=float)
        data = Dataset(inputs=tuple(cols),
                       output=Column(name="y", kind=out_kind, values=y_values))

        self.report_ = sensitivity_from_samples(handle, data, bins=self.bins,
                                                rng_seed=self.seed)
        self.indices_ = np.array([e.S for e in self.report_.indices])
        return self


def _intern_output(y) -> np.ndarray:
    ids: dict = {}
    out = np.empty(len(y), dtype=int)
    for i, v in enumerate(y):
        key = v.item() if hasattr(v, "item") else v
        if key not in ids:
            ids[key] = len(ids)
        out[i] = ids[key]
    return out
