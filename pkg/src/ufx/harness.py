"""Property-testing engine for the three defining properties of uncertainty.

The harness checks, against any registered functional, the mixture
inequality ``H(mean measure) >= expected H``, its conditional-law
reformulation on finite joints, concavity along two-measure segments, and
vanishing on Dirac measures.  All margins are computed exactly on finitely
represented measures; a passing verdict therefore means "no violation found
in N trials", never a proof.  Every failure ships a witness from which the
margin can be recomputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import CapabilityError, PreconditionError, ValidationError
from .measures import (Atomic, DiscreteMeasure, DiracPushforward,
                       FiniteMixture, MeasureRepr, SymmetrizedDiracPair,
                       TailedMeasureN, TailedN, dirac, intensity,
                       measure_from_json, measure_to_json, merge_atoms, mix,
                       sample_realization)

JENSEN_TOL = 1e-10
DIRAC_TOL = 1e-12


@dataclass(frozen=True)
class FunctionalHandle:
    """A named functional of measure representations with capability flags."""

    name: str
    evaluate: Callable[[MeasureRepr], float]
    atomic_only: bool = True
    tailed_capable: bool = False
    atomless_capable: bool = False
    #: optional exact evaluation from raw samples (used by the sensitivity module)
    evaluate_samples: Callable[[Sequence], float] | None = None
    spec: Mapping | None = field(default=None, compare=False)


def _sub(margin_hi: float, margin_lo: float) -> float:
    # extended difference: an infinite H(mean) passes trivially, an infinite
    # expected value against a finite mean is a genuine violation
    if math.isinf(margin_hi):
        return math.inf if margin_hi > 0 else -math.inf
    if math.isinf(margin_lo):
        return -math.inf if margin_lo > 0 else math.inf
    return margin_hi - margin_lo


@dataclass(frozen=True)
class MixtureWitness:
    """A reproducible mixture trial: components, mean measure, and values."""

    weights: tuple[float, ...]
    components: tuple[MeasureRepr, ...]
    intensity_repr: MeasureRepr
    component_values: tuple[float, ...]
    intensity_value: float
    margin: float
    trial: int

    def to_json(self) -> dict:
        return {"weights": list(self.weights),
                "components": [measure_to_json(c) for c in self.components],
                "intensity": measure_to_json(self.intensity_repr),
                "component_values": list(self.component_values),
                "intensity_value": self.intensity_value,
                "margin": self.margin,
                "trial": self.trial}

    @staticmethod
    def from_json(obj: Mapping) -> "MixtureWitness":
        return MixtureWitness(
            weights=tuple(float(w) for w in obj["weights"]),
            components=tuple(measure_from_json(c) for c in obj["components"]),
            intensity_repr=measure_from_json(obj["intensity"]),
            component_values=tuple(float(v) for v in obj["component_values"]),
            intensity_value=float(obj["intensity_value"]),
            margin=float(obj["margin"]),
            trial=int(obj["trial"]))


def recompute_margin(handle: FunctionalHandle, witness: MixtureWitness) -> float:
    """Re-evaluate a witness from its serialized measures."""
    e_h = sum(w * handle.evaluate(c)
              for w, c in zip(witness.weights, witness.components))
    return _sub(handle.evaluate(witness.intensity_repr), e_h)


@dataclass(frozen=True)
class JensenVerdict:
    functional: str
    check: str
    trials: int
    worst_margin: float
    passed: bool
    tolerance: float
    seed: int | None
    witness: MixtureWitness | None

    def to_json(self) -> dict:
        return {"functional": self.functional,
                "check": self.check,
                "trials": self.trials,
                "worst_margin": self.worst_margin,
                "passed": self.passed,
                "tolerance": self.tolerance,
                "seed": self.seed,
                "witness": self.witness.to_json() if self.witness else None}


@dataclass(frozen=True)
class GeneratorConfig:
    """Mixture generator settings for :func:`check_jensen`.

    ``kind`` selects the family: "atomic" draws 2-8 random measures over a
    random small support of nonnegative integers with Dirichlet weights;
    "dirac_pushforward" and "symmetrized_pair" draw the two push-forward
    constructions used by the counterexamples.
    """

    kind: str = "atomic"
    max_components: int = 8
    max_support: int = 8
    outcome_high: int = 8
    rate: float = 1.0
    tail_exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in ("atomic", "dirac_pushforward", "symmetrized_pair"):
            raise ValidationError(f"unknown generator kind {self.kind!r}")
        if self.max_components < 2 or self.max_support < 1:
            raise ValidationError("generator needs >= 2 components and >= 1 support point")


def _random_atomic(rng: np.random.Generator, support: np.ndarray) -> Atomic:
    weights = rng.dirichlet(np.ones(len(support)))
    return Atomic(merge_atoms(zip((float(y) for y in support), weights)))


def _draw_atomic_mixture(rng: np.random.Generator, cfg: GeneratorConfig) -> FiniteMixture:
    n_comp = int(rng.integers(2, cfg.max_components + 1))
    size = int(rng.integers(1, cfg.max_support + 1))
    support = rng.choice(cfg.outcome_high + 1, size=min(size, cfg.outcome_high + 1),
                         replace=False)
    mix_w = rng.dirichlet(np.ones(n_comp))
    comps = tuple((float(w), _random_atomic(rng, support)) for w in mix_w)
    return FiniteMixture(comps)


def _trial_margin(handle: FunctionalHandle, rm, rng, trial: int) -> MixtureWitness:
    """Exact Jensen margin of one generated random measure."""
    if isinstance(rm, FiniteMixture):
        weights = tuple(w for w, _ in rm.components)
        comps = tuple(c for _, c in rm.components)
        nu_bar = intensity(rm)
    elif isinstance(rm, SymmetrizedDiracPair):
        if not handle.atomless_capable:
            raise CapabilityError(f"{handle.name} cannot evaluate atomless measures")
        # H is almost surely constant across realizations; one draw gives the
        # exact expected value
        comps = (sample_realization(rm, rng),)
        weights = (1.0,)
        nu_bar = intensity(rm)
    elif isinstance(rm, DiracPushforward):
        if not handle.tailed_capable:
            raise CapabilityError(f"{handle.name} cannot evaluate tailed measures")
        # realizations are Dirac measures; verify H is constant on a probe set
        # so the infinite expectation reduces to that constant
        probes = [handle.evaluate(dirac(float(x))) for x in range(32)]
        if max(probes) - min(probes) > DIRAC_TOL:
            raise CapabilityError(
                f"{handle.name} is not constant on Dirac measures; the "
                "push-forward expectation is not finitely computable")
        comps = (dirac(0.0),)
        weights = (1.0,)
        nu_bar = intensity(rm)
    else:
        raise ValidationError(f"unsupported random measure {rm!r}")

    values = tuple(handle.evaluate(c) for c in comps)
    e_h = sum(w * v for w, v in zip(weights, values))
    h_bar = handle.evaluate(nu_bar)
    return MixtureWitness(weights=weights, components=comps, intensity_repr=nu_bar,
                          component_values=values, intensity_value=h_bar,
                          margin=_sub(h_bar, e_h), trial=trial)


def check_jensen(handle: FunctionalHandle, generator: GeneratorConfig | None = None,
                 trials: int = 500, rng_seed: int = 0,
                 tolerance: float = JENSEN_TOL) -> JensenVerdict:
    """Search for a mixture whose expected value exceeds the mean measure's.

    Trials draw independent seeded substreams, so the verdict and witness
    are reproducible and schedule-independent.
    """
    cfg = generator or GeneratorConfig()
    worst = math.inf
    witness = None
    for t in range(trials):
        rng = np.random.default_rng([rng_seed, t])
        if cfg.kind == "atomic":
            rm = _draw_atomic_mixture(rng, cfg)
        elif cfg.kind == "symmetrized_pair":
            rm = SymmetrizedDiracPair(rate=cfg.rate)
        else:
            rm = DiracPushforward(TailedMeasureN.power_law(cfg.tail_exponent))
        result = _trial_margin(handle, rm, rng, t)
        if result.margin < worst:
            worst = result.margin
            if result.margin < -tolerance:
                witness = result
    passed = worst >= -tolerance
    return JensenVerdict(functional=handle.name, check="jensen", trials=trials,
                         worst_margin=worst, passed=passed, tolerance=tolerance,
                         seed=rng_seed, witness=None if passed else witness)


@dataclass(frozen=True)
class JointPmf:
    """Finite joint distribution of an experiment X and an outcome Y."""

    pmf: tuple[tuple[float, ...], ...]
    y_outcomes: tuple
    x_labels: tuple | None = None

    def __post_init__(self):
        arr = np.asarray(self.pmf, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValidationError("the joint pmf must be a nonempty 2-d table")
        if arr.shape[1] != len(self.y_outcomes):
            raise ValidationError("one pmf column per outcome is required")
        if self.x_labels is not None and arr.shape[0] != len(self.x_labels):
            raise ValidationError("one pmf row per experiment value is required")
        if np.any(arr < 0.0):
            raise ValidationError("joint probabilities must be nonnegative")
        total = float(arr.sum())
        if total == 0.0:
            raise ValidationError("the joint pmf is identically zero")
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"joint probabilities sum to {total!r}, expected 1")

    @staticmethod
    def from_arrays(pmf, y_outcomes, x_labels=None) -> "JointPmf":
        arr = np.asarray(pmf, dtype=float)
        return JointPmf(pmf=tuple(map(tuple, arr)),
                        y_outcomes=tuple(y_outcomes),
                        x_labels=tuple(x_labels) if x_labels is not None else None)

    def marginal_y(self) -> DiscreteMeasure:
        arr = np.asarray(self.pmf, dtype=float)
        return merge_atoms(zip(self.y_outcomes, arr.sum(axis=0)))

    def conditionals(self) -> tuple[tuple[float, DiscreteMeasure], ...]:
        """Rows with positive probability, as (P(X=x), law of Y given X=x)."""
        arr = np.asarray(self.pmf, dtype=float)
        out = []
        for row in arr:
            px = float(row.sum())
            if px == 0.0:
                continue
            cond = merge_atoms(zip(self.y_outcomes, row / px))
            out.append((px, cond))
        return tuple(out)


def check_doa_from_joint(handle: FunctionalHandle, joint: JointPmf,
                         tolerance: float = JENSEN_TOL) -> JensenVerdict:
    """Exact decreasing-on-average margin of one finite experiment.

    Conditioning rows are normalized exactly and the experiment becomes the
    mixture of conditional laws weighted by the marginal of X, so this is
    the same computation as the mixture inequality.
    """
    conds = joint.conditionals()
    weights = tuple(px for px, _ in conds)
    comps = tuple(Atomic(c) for _, c in conds)
    nu_bar = Atomic(joint.marginal_y())
    values = tuple(handle.evaluate(c) for c in comps)
    e_h = sum(w * v for w, v in zip(weights, values))
    h_bar = handle.evaluate(nu_bar)
    margin = _sub(h_bar, e_h)
    witness = MixtureWitness(weights=weights, components=comps,
                             intensity_repr=nu_bar, component_values=values,
                             intensity_value=h_bar, margin=margin, trial=0)
    passed = margin >= -tolerance
    return JensenVerdict(functional=handle.name, check="doa", trials=1,
                         worst_margin=margin, passed=passed, tolerance=tolerance,
                         seed=None, witness=None if passed else witness)


def _draw_concavity_pair(rng: np.random.Generator, handle: FunctionalHandle,
                         cfg: GeneratorConfig):
    modes = ["atomic"]
    if handle.tailed_capable:
        modes.append("tailed")
    if handle.atomless_capable:
        modes.append("atomless")
    mode = modes[int(rng.integers(0, len(modes)))]

    if mode == "atomic":
        size = int(rng.integers(1, cfg.max_support + 1))
        support = rng.choice(cfg.outcome_high + 1, size=size, replace=False)
        return _random_atomic(rng, support), _random_atomic(rng, support)
    if mode == "tailed":
        # same exponent so the mixture stays representable
        s = float(rng.choice([2.0, 2.5, 3.0]))
        return (TailedN(_random_tailed(rng, s)), TailedN(_random_tailed(rng, s)))
    size = int(rng.integers(1, cfg.max_support + 1))
    support = rng.choice(cfg.outcome_high + 1, size=size, replace=False)
    from .measures import Atomless
    return Atomless("Laplace(1)"), _random_atomic(rng, support)


def _random_tailed(rng: np.random.Generator, s: float) -> TailedMeasureN:
    head_size = int(rng.integers(0, 4))
    head_mass = float(rng.uniform(0.0, 0.8)) if head_size else 0.0
    head = {}
    if head_size:
        probs = rng.dirichlet(np.ones(head_size)) * head_mass
        head = {int(y): float(p) for y, p in enumerate(probs)}
    return TailedMeasureN.from_head(head, s, cutoff=max(head_size, 0))


def check_concavity(handle: FunctionalHandle, trials: int = 500, rng_seed: int = 0,
                    tolerance: float = JENSEN_TOL,
                    generator: GeneratorConfig | None = None) -> JensenVerdict:
    """Exact two-measure segment check of concavity.

    Each trial draws a pair compatible with the handle's capabilities and a
    uniform mixing weight, materializes the pointwise mixture, and compares
    the values.  A two-point mixture is also a random measure, so this is
    the special case of the mixture inequality that concavity captures.
    """
    cfg = generator or GeneratorConfig()
    worst = math.inf
    witness = None
    for t in range(trials):
        rng = np.random.default_rng([rng_seed, t])
        a, b = _draw_concavity_pair(rng, handle, cfg)
        lam = float(rng.uniform(0.0, 1.0))
        mixture = mix(lam, a, b)
        values = (handle.evaluate(a), handle.evaluate(b))
        e_h = lam * values[0] + (1.0 - lam) * values[1]
        h_mix = handle.evaluate(mixture)
        margin = _sub(h_mix, e_h)
        if margin < worst:
            worst = margin
            if margin < -tolerance:
                witness = MixtureWitness(weights=(lam, 1.0 - lam), components=(a, b),
                                         intensity_repr=mixture,
                                         component_values=values,
                                         intensity_value=h_mix, margin=margin,
                                         trial=t)
    passed = worst >= -tolerance
    return JensenVerdict(functional=handle.name, check="concavity", trials=trials,
                         worst_margin=worst, passed=passed, tolerance=tolerance,
                         seed=rng_seed, witness=None if passed else witness)


def check_dirac_vanishing(handle: FunctionalHandle, outcomes: Sequence,
                          tolerance: float = DIRAC_TOL) -> JensenVerdict:
    """Assert ``|H(delta_y)| <= tolerance`` for each listed outcome."""
    if len(outcomes) == 0:
        raise PreconditionError("at least one outcome is required")
    worst = 0.0
    witness = None
    for i, y in enumerate(outcomes):
        d = dirac(y)
        v = handle.evaluate(d)
        if abs(v) > abs(worst):
            worst = v
            if abs(v) > tolerance:
                witness = MixtureWitness(weights=(1.0,), components=(d,),
                                         intensity_repr=d, component_values=(v,),
                                         intensity_value=v, margin=-abs(v), trial=i)
    passed = abs(worst) <= tolerance
    return JensenVerdict(functional=handle.name, check="dirac_vanishing",
                         trials=len(outcomes), worst_margin=-abs(worst),
                         passed=passed, tolerance=tolerance, seed=None,
                         witness=None if passed else witness)
