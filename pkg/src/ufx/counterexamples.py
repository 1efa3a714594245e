"""Two concave functionals that fail the mixture (Jensen) inequality.

Both are exactly evaluable on the tagged measure representations, so the
demonstrations below are closed-form computations, not simulations.

The first lives on the naturals: the limit inferior of ``-y^2 nu_y``,
patched to zero where that limit is ``-inf``.  It is concave, nonpositive,
zero on every finitely supported measure, yet strictly negative on the
quadratic-tail law, whereas every Dirac realization scores zero.

The second lives on the reals: the total atom heterogeneity
``sum_s nu_s (1 - nu_s)``.  It is concave, bounded by one, zero on Dirac and
atomless measures, yet a symmetric two-atom realization scores one half
while its atomless mean measure scores zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, ValidationError
from .measures import (Atomic, Atomless, DiracPushforward, Mixed,
                       SymmetrizedDiracPair, TailedMeasureN, TailedN,
                       MeasureRepr, intensity)


def _natural_atom_check(measure):
    for y, _ in measure.atoms:
        if not (isinstance(y, float) and y >= 0.0 and y == int(y)):
            raise DomainError(f"outcome {y!r} is not a natural number")


def ce1_tail_liminf(mr: MeasureRepr) -> float:
    """The raw tail functional ``liminf_{y->inf}(-y^2 nu_y)``; may be ``-inf``.

    Evaluated in closed form from the representation: a limit inferior is
    not computable from finite prefixes, so truncation is never used.
    """
    if isinstance(mr, Atomic):
        _natural_atom_check(mr.measure)
        return 0.0  # finite support: -y^2 nu_y is eventually zero
    if isinstance(mr, TailedN):
        return mr.measure.tail_liminf()
    raise DomainError("the tail functional is defined on measures over the naturals")


def ce1_value(mr: MeasureRepr) -> float:
    """Tail functional patched to zero on its ``-inf`` branch; range (-inf, 0]."""
    g = ce1_tail_liminf(mr)
    return g if g > -math.inf else 0.0


def ce1_mixture_value(components: Sequence[tuple[float, MeasureRepr]]) -> float:
    """Value of the patched tail functional on a pointwise mixture.

    Closed form valid for mixtures of tailed and finitely supported
    measures on the naturals, including mixtures of distinct tail
    exponents: a surviving sub-quadratic tail drives the liminf to
    ``-inf`` (patched to zero), exactly quadratic tails add their
    coefficients, faster tails contribute nothing.
    """
    g = 0.0
    for w, part in components:
        if isinstance(part, Atomic):
            _natural_atom_check(part.measure)
            continue
        if not isinstance(part, TailedN):
            raise DomainError("mixture components must live on the naturals")
        t = part.measure
        if w == 0.0 or t.tail_coeff == 0.0 or t.tail_exponent > 2.0:
            continue
        if t.tail_exponent < 2.0:
            return 0.0  # liminf is -inf, patched branch
        g -= w * t.tail_coeff
    return g


def ce2_value(mr: MeasureRepr) -> float:
    """Total atom heterogeneity ``sum_s nu_s (1 - nu_s)``, in [0, 1).

    Atomless measures score zero by their representation tag (atomlessness
    is declared, never sample-detected); tailed measures are summed exactly
    through the zeta function.
    """
    if isinstance(mr, Atomless):
        return 0.0
    if isinstance(mr, Atomic):
        return float(sum(w * (1.0 - w) for _, w in mr.measure.atoms))
    if isinstance(mr, Mixed):
        return float(sum(p * (1.0 - p) for _, p in mr.atom_masses()))
    if isinstance(mr, TailedN):
        return 1.0 - mr.measure.sum_of_squared_masses()
    raise ValidationError(f"unknown measure representation {mr!r}")


@dataclass(frozen=True)
class JensenViolationReport:
    """Closed-form demonstration that a mixture inequality fails.

    ``margin`` is the violation size ``E(H(nu)) - H(mean measure)``,
    positive exactly when the inequality is violated.
    """

    functional: str
    H_bar: float
    E_H: float
    violated: bool
    margin: float
    intensity_repr: MeasureRepr

    def to_json(self) -> dict:
        from .measures import measure_to_json
        return {"functional": self.functional,
                "H_bar": self.H_bar,
                "E_H": self.E_H,
                "violated": self.violated,
                "margin": self.margin,
                "intensity": measure_to_json(self.intensity_repr)}


def ce1_demo() -> JensenViolationReport:
    """Dirac push-forward of the quadratic-tail law on the naturals.

    The mean measure is the law itself, with value ``-6/pi^2``; every
    realization is a Dirac measure, with value zero.
    """
    law = TailedMeasureN.power_law(2.0)
    rm = DiracPushforward(law)
    nu_bar = intensity(rm)
    h_bar = ce1_value(nu_bar)
    e_h = 0.0  # realizations are Dirac measures, on which the functional vanishes
    return JensenViolationReport(functional="ce1", H_bar=h_bar, E_H=e_h,
                                 violated=h_bar < e_h, margin=e_h - h_bar,
                                 intensity_repr=nu_bar)


def ce2_demo() -> JensenViolationReport:
    """Symmetrized Dirac pair around an exponential draw.

    Almost surely the realization carries two atoms of mass one half, so its
    value is exactly one half; the mean measure is a Laplace distribution,
    atomless, so its value is zero.
    """
    rm = SymmetrizedDiracPair(rate=1.0)
    nu_bar = intensity(rm)
    h_bar = ce2_value(nu_bar)
    e_h = 0.5  # a.s. constant: two atoms of mass 1/2 give 2 * (1/2) * (1/2)
    return JensenViolationReport(functional="ce2", H_bar=h_bar, E_H=e_h,
                                 violated=e_h > h_bar, margin=e_h - h_bar,
                                 intensity_repr=nu_bar)
