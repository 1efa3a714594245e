"""Quadratic uncertainty functionals ``H(nu) = double-integral of rho``.

A kernel is a symmetric nonnegative function of two outcomes, zero on the
diagonal for the built-in families.  On a finitely supported measure the
functional is the weighted double sum of kernel values; scalar kernels with
closed forms (variance, mean absolute difference, match/mismatch) switch to
an exact O(n) or O(n log n) evaluation on large supports.

Conditional negative definiteness (zero-sum quadratic forms being
nonpositive) is what makes such a functional an uncertainty functional; a
seeded randomized certifier searches for violations, and the Hilbert-space
embedding ``k(y, y') = (rho(y, y0) + rho(y', y0) - rho(y, y')) / 2`` gives the
exact identity ``quad form = -2 ||embedding||^2`` on zero-mass signed
measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (DomainError, EstimatorError, PreconditionError,
                     SelfCheckError, UnsupportedRepresentationError,
                     ValidationError)
from .measures import (Atomic, Category, DiscreteMeasure, FiniteMixture,
                       Outcome, as_outcome, intensity, outcome_sort_key)

ZERO_SUM_TOL = 1e-12
EMBED_TOL = 1e-10
VIOLATION_THRESHOLD = 1e-9

# supports up to this size use the explicit pairwise double sum
_PAIRWISE_LIMIT = 2048


def _scalar_values(outcomes: Sequence[Outcome]) -> np.ndarray:
    if not all(isinstance(y, float) for y in outcomes):
        raise DomainError("this kernel is defined on real scalar outcomes")
    return np.array(outcomes, dtype=float)


def _vector_values(outcomes: Sequence[Outcome]) -> np.ndarray:
    if all(isinstance(y, float) for y in outcomes):
        return np.array(outcomes, dtype=float).reshape(-1, 1)
    if all(isinstance(y, tuple) for y in outcomes):
        dims = {len(y) for y in outcomes}
        if len(dims) > 1:
            raise DomainError("vector outcomes must share one dimension")
        return np.array(outcomes, dtype=float)
    raise DomainError("this kernel is defined on scalar or vector outcomes")


class KernelSpec:
    """Base class for quadratic-functional kernels."""

    name: str = "kernel"
    #: True when the kernel family is conditionally negative definite by theory.
    known_cnd: bool = False

    def rho(self, y, y2) -> float:
        y, y2 = as_outcome(y), as_outcome(y2)
        return float(self.rho_matrix([y, y2])[0, 1])

    def rho_matrix(self, outcomes: Sequence[Outcome]) -> np.ndarray:
        raise NotImplementedError

    def vanishes_on_diagonal(self) -> bool:
        return True

    def sample_outcomes(self, m: int, rng: np.random.Generator) -> list[Outcome]:
        """Search domain of the randomized certifier."""
        return [float(v) for v in rng.uniform(-3.0, 3.0, size=m)]

    def large_support_value(self, values: np.ndarray, weights: np.ndarray) -> float | None:
        """Closed-form double sum for big scalar supports; None when unavailable."""
        return None

    def scalar_rho_block(self, a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
        """Vectorized kernel block on scalar values; None when unavailable."""
        return None

    def to_json(self) -> dict:
        raise ValidationError(f"{self.name} kernel is not JSON-serializable")


@dataclass(frozen=True)
class SquaredHalf(KernelSpec):
    """rho(y, y') = (y - y')^2 / 2 on scalars; the functional is the variance."""

    name: str = "squared_half"
    known_cnd: bool = True

    def rho_matrix(self, outcomes):
        v = _scalar_values(outcomes)
        d = v[:, None] - v[None, :]
        return 0.5 * d * d

    def large_support_value(self, values, weights):
        mean = float(np.dot(weights, values))
        return float(np.dot(weights, (values - mean) ** 2))

    def to_json(self):
        return {"kernel": "squared_half"}


@dataclass(frozen=True)
class AbsDiff(KernelSpec):
    """rho(y, y') = |y - y'| on scalars; the functional is Gini's mean difference."""

    name: str = "abs_diff"
    known_cnd: bool = True

    def rho_matrix(self, outcomes):
        v = _scalar_values(outcomes)
        return np.abs(v[:, None] - v[None, :])

    def large_support_value(self, values, weights):
        order = np.argsort(values, kind="stable")
        v, w = values[order], weights[order]
        cum_w = np.concatenate(([0.0], np.cumsum(w)))[:-1]
        cum_wv = np.concatenate(([0.0], np.cumsum(w * v)))[:-1]
        return float(2.0 * np.sum(w * (v * cum_w - cum_wv)))

    def to_json(self):
        return {"kernel": "abs_diff"}


@dataclass(frozen=True)
class FractionalPower(KernelSpec):
    """rho(y, y') = ||y - y'||^beta with 0 < beta < 2 (fractional Brownian variance)."""

    beta: float
    name: str = "fractional_power"
    known_cnd: bool = True

    def __post_init__(self):
        if not (0.0 < self.beta < 2.0):
            raise ValidationError(f"fractional exponent must lie in (0, 2), got {self.beta}")

    def rho_matrix(self, outcomes):
        x = _vector_values(outcomes)
        return cdist(x, x) ** self.beta

    def scalar_rho_block(self, a, b):
        return np.abs(a[:, None] - b[None, :]) ** self.beta

    def to_json(self):
        return {"kernel": {"fractional": self.beta}}


@dataclass(frozen=True)
class PowerUnrestricted(KernelSpec):
    """rho(y, y') = ||y - y'||^beta for any beta > 0; not CND once beta > 2."""

    beta: float
    name: str = "power"

    def __post_init__(self):
        if not (self.beta > 0.0):
            raise ValidationError(f"power exponent must be positive, got {self.beta}")

    @property
    def known_cnd(self) -> bool:
        return self.beta <= 2.0

    def rho_matrix(self, outcomes):
        x = _vector_values(outcomes)
        return cdist(x, x) ** self.beta

    def scalar_rho_block(self, a, b):
        return np.abs(a[:, None] - b[None, :]) ** self.beta

    def to_json(self):
        return {"kernel": {"power": self.beta}}


@dataclass(frozen=True)
class Discrete01(KernelSpec):
    """rho(y, y') = 1 when y != y'; recovers the Gini-Simpson index."""

    name: str = "discrete01"
    known_cnd: bool = True

    def rho_matrix(self, outcomes):
        n = len(outcomes)
        mat = np.ones((n, n))
        for i in range(n):
            for j in range(n):
                if outcomes[i] == outcomes[j]:
                    mat[i, j] = 0.0
        return mat

    def sample_outcomes(self, m, rng):
        return [Category(int(i)) for i in rng.integers(0, 10, size=m)]

    def to_json(self):
        return {"kernel": "discrete01"}


@dataclass(frozen=True)
class IntegratedVarianceGrid(KernelSpec):
    """Integrated variance over a finite grid of test functions.

    ``xi[i, t]`` is the value of test function ``t`` at declared outcome
    ``i`` and ``mu[t] >= 0`` its quadrature weight, so
    ``rho(y, y') = sum_t mu[t] * (xi(y,t) - xi(y',t))^2 / 2`` and the
    functional is ``sum_t mu[t] * Var(xi(., t))``.  A sigma-finite weighting
    must be discretized by the caller.
    """

    outcomes: tuple[Outcome, ...]
    xi: tuple[tuple[float, ...], ...]
    mu: tuple[float, ...]
    name: str = "integrated_variance"
    known_cnd: bool = True

    def __post_init__(self):
        if len(self.xi) != len(self.outcomes):
            raise ValidationError("one xi row per declared outcome is required")
        widths = {len(row) for row in self.xi} | {len(self.mu)}
        if len(widths) != 1:
            raise ValidationError("xi rows and mu must share the grid length")
        if any(m < 0.0 for m in self.mu):
            raise ValidationError("grid weights must be nonnegative")

    @staticmethod
    def from_arrays(outcomes, xi, mu) -> "IntegratedVarianceGrid":
        outs = tuple(as_outcome(y) for y in outcomes)
        xi = np.asarray(xi, dtype=float)
        mu = np.asarray(mu, dtype=float)
        return IntegratedVarianceGrid(outcomes=outs,
                                      xi=tuple(map(tuple, xi)),
                                      mu=tuple(mu))

    def _index(self, outcomes):
        table = {y: i for i, y in enumerate(self.outcomes)}
        try:
            return [table[y] for y in outcomes]
        except KeyError as exc:
            raise DomainError(f"outcome {exc.args[0]!r} not declared for this kernel")

    def rho_matrix(self, outcomes):
        idx = self._index(outcomes)
        xi = np.asarray(self.xi, dtype=float)[idx]
        mu = np.asarray(self.mu, dtype=float)
        diff = xi[:, None, :] - xi[None, :, :]
        return 0.5 * np.tensordot(diff * diff, mu, axes=([2], [0]))

    def sample_outcomes(self, m, rng):
        picks = rng.integers(0, len(self.outcomes), size=m)
        return [self.outcomes[int(i)] for i in picks]

    def to_json(self):
        return {"kernel": {"integrated_variance": {
            "outcomes": [_outcome_json(y) for y in self.outcomes],
            "xi": [list(row) for row in self.xi],
            "mu": list(self.mu)}}}


@dataclass(frozen=True)
class UserTable(KernelSpec):
    """Kernel given by an explicit symmetric nonnegative matrix.

    The diagonal is *not* forced to zero: a nonzero diagonal is a legitimate
    way to construct a functional that fails to vanish on Dirac measures, so
    it is surfaced through :meth:`vanishes_on_diagonal` instead of rejected.
    """

    outcomes: tuple[Outcome, ...]
    table: tuple[tuple[float, ...], ...]
    name: str = "table"

    def __post_init__(self):
        n = len(self.outcomes)
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ValidationError("kernel table must be square over the declared outcomes")
        for i in range(n):
            for j in range(n):
                if self.table[i][j] < 0.0:
                    raise ValidationError("kernel table entries must be nonnegative")
                if self.table[i][j] != self.table[j][i]:
                    raise ValidationError("kernel table must be symmetric")

    @staticmethod
    def from_arrays(outcomes, table) -> "UserTable":
        outs = tuple(as_outcome(y) for y in outcomes)
        return UserTable(outcomes=outs, table=tuple(map(tuple, np.asarray(table, float))))

    def vanishes_on_diagonal(self):
        return all(self.table[i][i] == 0.0 for i in range(len(self.outcomes)))

    def _index(self, outcomes):
        table = {y: i for i, y in enumerate(self.outcomes)}
        try:
            return [table[y] for y in outcomes]
        except KeyError as exc:
            raise DomainError(f"outcome {exc.args[0]!r} not declared for this kernel")

    def rho_matrix(self, outcomes):
        idx = self._index(outcomes)
        return np.asarray(self.table, dtype=float)[np.ix_(idx, idx)]

    def sample_outcomes(self, m, rng):
        picks = rng.integers(0, len(self.outcomes), size=m)
        return [self.outcomes[int(i)] for i in picks]

    def to_json(self):
        return {"kernel": {"table": {
            "outcomes": [_outcome_json(y) for y in self.outcomes],
            "rho": [list(row) for row in self.table]}}}


def _outcome_json(y):
    from .measures import outcome_to_json
    return outcome_to_json(y)


def kernel_from_json(obj: Mapping) -> KernelSpec:
    spec = obj.get("kernel")
    if spec == "squared_half":
        return SquaredHalf()
    if spec == "abs_diff":
        return AbsDiff()
    if spec == "discrete01":
        return Discrete01()
    if isinstance(spec, Mapping):
        if "fractional" in spec:
            return FractionalPower(beta=float(spec["fractional"]))
        if "power" in spec:
            return PowerUnrestricted(beta=float(spec["power"]))
        if "integrated_variance" in spec:
            iv = spec["integrated_variance"]
            from .measures import outcome_from_json
            return IntegratedVarianceGrid.from_arrays(
                [outcome_from_json(y) for y in iv["outcomes"]], iv["xi"], iv["mu"])
        if "table" in spec:
            tb = spec["table"]
            from .measures import outcome_from_json
            return UserTable.from_arrays(
                [outcome_from_json(y) for y in tb["outcomes"]], tb["rho"])
    raise ValidationError(f"unknown kernel spec {obj!r}")


# ---------------------------------------------------------------------------
# Functional evaluation
# ---------------------------------------------------------------------------


def quf_value(kernel: KernelSpec, measure: DiscreteMeasure | Atomic,
              estimator: str = "v_stat") -> float:
    """Quadratic functional of a discrete measure.

    ``v_stat`` is the functional itself, the full weighted double sum.
    ``u_stat`` applies the ``n / (n - 1)`` degree-two debiasing and is only
    meaningful for equal-weight empirical measures; since the kernel
    vanishes on the diagonal the two differ exactly by that factor.
    """
    if isinstance(measure, Atomic):
        measure = measure.measure
    value = _v_stat(kernel, measure)
    if estimator == "v_stat":
        return value
    if estimator != "u_stat":
        raise ValidationError(f"unknown estimator {estimator!r}")
    n = len(measure)
    if n < 2:
        raise EstimatorError("the unbiased estimator needs at least two atoms")
    if np.max(np.abs(measure.weights - 1.0 / n)) > ZERO_SUM_TOL:
        raise EstimatorError("the unbiased estimator needs equal-weight atoms")
    return value * n / (n - 1)


def quf_value_samples(kernel: KernelSpec, values: Sequence,
                      estimator: str = "u_stat") -> float:
    """Quadratic functional evaluated from raw samples.

    The empirical double sum is insensitive to duplicate samples, so the
    ``u_stat`` correction uses the raw sample count and remains valid in the
    presence of ties.
    """
    from .measures import empirical_measure
    n = len(values)
    emp = empirical_measure(values)
    value = _v_stat(kernel, emp)
    if estimator == "v_stat":
        return value
    if estimator != "u_stat":
        raise ValidationError(f"unknown estimator {estimator!r}")
    if n < 2:
        raise EstimatorError("the unbiased estimator needs at least two samples")
    return value * n / (n - 1)


def _v_stat(kernel: KernelSpec, measure: DiscreteMeasure) -> float:
    w = measure.weights
    outcomes = measure.outcomes
    if isinstance(kernel, Discrete01):
        # exact reformulation of the masked double sum: off-diagonal mass
        total = float(np.sum(w))
        return total * total - float(np.dot(w, w))
    if len(outcomes) > _PAIRWISE_LIMIT:
        if all(isinstance(y, float) for y in outcomes):
            v = np.array(outcomes, dtype=float)
            fast = kernel.large_support_value(v, w)
            if fast is not None:
                return fast
            return _chunked_vstat(kernel, v, w)
        raise UnsupportedRepresentationError(
            f"support of size {len(outcomes)} is too large for this kernel")
    mat = kernel.rho_matrix(outcomes)
    return float(w @ mat @ w)


def _chunked_vstat(kernel: KernelSpec, values: np.ndarray, w: np.ndarray,
                   block: int = 1024) -> float:
    total = 0.0
    n = len(values)
    for start in range(0, n, block):
        stop = min(start + block, n)
        mat = kernel.scalar_rho_block(values[start:stop], values)
        if mat is None:
            raise UnsupportedRepresentationError(
                f"support of size {n} is too large for the {kernel.name} kernel")
        total += float(w[start:stop] @ mat @ w)
    return total


# ---------------------------------------------------------------------------
# Conditional negative definiteness
# ---------------------------------------------------------------------------


def cnd_quadratic_form(kernel: KernelSpec, points: Sequence,
                       lam: Sequence[float]) -> float:
    """Zero-sum quadratic form ``sum_{k,l} lam_k lam_l rho(y_k, y_l)``."""
    points = [as_outcome(y) for y in points]
    lam = np.asarray(lam, dtype=float)
    if len(points) != len(lam) or len(points) < 1:
        raise PreconditionError("points and coefficients must have equal positive length")
    if abs(float(np.sum(lam))) > ZERO_SUM_TOL:
        raise PreconditionError(f"coefficients must sum to zero, got {float(np.sum(lam))!r}")
    mat = kernel.rho_matrix(points)
    return float(lam @ mat @ lam)


@dataclass(frozen=True)
class CndViolation:
    points: tuple[Outcome, ...]
    lam: tuple[float, ...]
    value: float
    trial: int


@dataclass(frozen=True)
class CndReport:
    kernel: str
    trials: int
    max_points: int
    seed: int
    verdict: str  # "no_violation_found" | "violation"
    witness: CndViolation | None

    def to_json(self) -> dict:
        payload = {"kernel": self.kernel, "trials": self.trials,
                   "max_points": self.max_points, "seed": self.seed,
                   "verdict": self.verdict, "witness": None}
        if self.witness is not None:
            payload["witness"] = {
                "points": [_outcome_json(y) for y in self.witness.points],
                "lambda": list(self.witness.lam),
                "value": self.witness.value,
                "trial": self.witness.trial}
        return payload


def cnd_certify(kernel: KernelSpec, trials: int = 1000, max_points: int = 8,
                rng_seed: int = 0) -> CndReport:
    """Randomized search for a positive zero-sum quadratic form.

    Each trial draws its own generator from ``(rng_seed, trial)``, so the
    outcome is independent of any execution schedule.  This is a search, not
    a proof: the verdict is "no violation found", never "CND".
    """
    if trials < 1:
        raise PreconditionError("at least one trial is required")
    witness = None
    for t in range(trials):
        rng = np.random.default_rng([rng_seed, t])
        m = int(rng.integers(2, max_points + 1))
        points = kernel.sample_outcomes(m, rng)
        lam = rng.standard_normal(m)
        lam -= lam.mean()
        value = float(lam @ kernel.rho_matrix(points) @ lam)
        if value > VIOLATION_THRESHOLD:
            witness = CndViolation(points=tuple(points),
                                   lam=tuple(float(v) for v in lam),
                                   value=value, trial=t)
            break
    return CndReport(kernel=kernel.name, trials=trials, max_points=max_points,
                     seed=rng_seed,
                     verdict="violation" if witness else "no_violation_found",
                     witness=witness)


# ---------------------------------------------------------------------------
# Hilbert-space embedding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingKernel:
    """Positive-definite kernel induced by anchoring a CND kernel at ``anchor``.

    ``k(y, y') = (rho(y, y0) + rho(y', y0) - rho(y, y')) / 2`` reconstructs
    the original kernel through ``rho = k(y,y) + k(y',y') - 2 k(y,y')``.
    """

    base: KernelSpec
    anchor: Outcome

    def k(self, y, y2) -> float:
        return float(self.k_matrix([as_outcome(y), as_outcome(y2)])[0, 1])

    def k_matrix(self, outcomes: Sequence[Outcome]) -> np.ndarray:
        pts = list(outcomes) + [self.anchor]
        rho = self.base.rho_matrix(pts)
        to_anchor = rho[:-1, -1]
        return 0.5 * (to_anchor[:, None] + to_anchor[None, :] - rho[:-1, :-1])


def induced_kernel(kernel: KernelSpec, y0) -> EmbeddingKernel:
    y0 = as_outcome(y0)
    kernel.rho(y0, y0)  # raises DomainError when the anchor is not covered
    return EmbeddingKernel(base=kernel, anchor=y0)


@dataclass(frozen=True)
class ZeroMassReport:
    quad_form: float
    neg_two_embed_sq: float
    anchor: Outcome | None


def zero_mass_energy(kernel: KernelSpec, atoms: Sequence,
                     weights: Sequence[float]) -> ZeroMassReport:
    """Check ``quad form == -2 ||embedding||^2`` on a zero-mass signed measure.

    The equality is algebraic for any symmetric kernel; when the kernel is
    known CND the quadratic form must additionally be nonpositive, and both
    facts are verified before returning.
    """
    atoms = [as_outcome(y) for y in atoms]
    weights = np.asarray(weights, dtype=float)
    if len(atoms) != len(weights):
        raise PreconditionError("atoms and weights must have equal length")
    if len(atoms) == 0:
        return ZeroMassReport(quad_form=0.0, neg_two_embed_sq=0.0, anchor=None)
    if abs(float(np.sum(weights))) > ZERO_SUM_TOL:
        raise PreconditionError("signed weights must sum to zero")
    quad = float(weights @ kernel.rho_matrix(atoms) @ weights)
    emb = induced_kernel(kernel, atoms[0])
    embed_sq = float(weights @ emb.k_matrix(atoms) @ weights)
    neg_two = -2.0 * embed_sq
    if abs(quad - neg_two) > EMBED_TOL:
        raise SelfCheckError(
            f"embedding identity failed: quad={quad!r} -2|emb|^2={neg_two!r}")
    if kernel.known_cnd and quad > EMBED_TOL:
        raise SelfCheckError(f"positive zero-sum form {quad!r} for a CND kernel")
    return ZeroMassReport(quad_form=quad, neg_two_embed_sq=neg_two, anchor=atoms[0])


# ---------------------------------------------------------------------------
# Jensen difference
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QufJensenReport:
    lhs_diff: float
    rhs_expected_quad: float


def quf_jensen_difference(kernel: KernelSpec, rm: FiniteMixture) -> QufJensenReport:
    """Jensen difference of a finite atomic mixture, computed two ways.

    The direct difference ``H(mean) - sum w_i H(nu_i)`` must equal the
    negated expected zero-mass quadratic form of the centered components;
    for a CND kernel it is also nonnegative.  Both checks run before the
    report is returned.
    """
    if not isinstance(rm, FiniteMixture):
        raise UnsupportedRepresentationError("expected a finite mixture")
    for _, part in rm.components:
        if not isinstance(part, Atomic):
            raise UnsupportedRepresentationError(
                "the quadratic identity needs all-atomic components")

    nu_bar = intensity(rm).measure
    lhs = quf_value(kernel, nu_bar) - sum(
        w * quf_value(kernel, part.measure) for w, part in rm.components)

    support = sorted({y for _, part in rm.components for y in part.measure.outcomes}
                     | set(nu_bar.outcomes), key=outcome_sort_key)
    mat = kernel.rho_matrix(support)
    bar_w = np.array([nu_bar.mass(y) for y in support])
    rhs = 0.0
    for w, part in rm.components:
        diff = np.array([part.measure.mass(y) for y in support]) - bar_w
        rhs -= w * float(diff @ mat @ diff)

    if abs(lhs - rhs) > EMBED_TOL:
        raise SelfCheckError(
            f"quadratic Jensen identity failed: lhs={lhs!r} rhs={rhs!r}")
    if kernel.known_cnd and lhs < -EMBED_TOL:
        raise SelfCheckError(f"negative Jensen difference {lhs!r} for a CND kernel")
    return QufJensenReport(lhs_diff=lhs, rhs_expected_quad=rhs)
