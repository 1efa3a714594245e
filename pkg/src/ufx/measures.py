"""Finitely representable probability measures and random measures.

Outcomes are real scalars, fixed-length real vectors, or categorical labels.
Measures come in four tagged representations: purely atomic (finite support),
declared atomless, an atomic/atomless mixture, and measures on the naturals
with a finite head and an exact power-law tail.  Random measures are finite
mixtures of those representations plus two push-forward constructors.

Everything here is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from .errors import PreconditionError, UnsupportedRepresentationError, ValidationError

WEIGHT_TOL = 1e-12
TAIL_MASS_TOL = 1e-10


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------


class Category:
    """Categorical outcome: a nonnegative integer id with an optional name.

    Identity (equality, hashing, ordering) is carried by the id alone; the
    name is a display attachment.
    """

    __slots__ = ("id", "name")

    def __init__(self, id: int, name: str | None = None):
        if not isinstance(id, (int, np.integer)) or isinstance(id, bool):
            raise ValidationError(f"category id must be an integer, got {id!r}")
        if id < 0:
            raise ValidationError(f"category id must be nonnegative, got {id}")
        object.__setattr__(self, "id", int(id))
        object.__setattr__(self, "name", name)

    def __setattr__(self, *args):
        raise AttributeError("Category is immutable")

    def __eq__(self, other):
        return isinstance(other, Category) and self.id == other.id

    def __hash__(self):
        return hash(("Category", self.id))

    def __repr__(self):
        if self.name is not None:
            return f"Category({self.id}, {self.name!r})"
        return f"Category({self.id})"


Outcome = Union[float, tuple, Category]


def as_outcome(y) -> Outcome:
    """Normalize ``y`` to a canonical outcome and validate it.

    Real scalars become floats, sequences become tuples of floats; both must
    be finite.  Comparisons between outcomes are bitwise-exact: no epsilon
    merging ever happens at the atom level.
    """
    if isinstance(y, Category):
        return y
    if isinstance(y, bool):
        raise ValidationError("booleans are not valid outcomes")
    if isinstance(y, (int, float, np.integer, np.floating)):
        v = float(y)
        if not math.isfinite(v):
            raise ValidationError(f"real outcomes must be finite, got {y!r}")
        return v
    if isinstance(y, (tuple, list, np.ndarray)):
        comps = tuple(float(c) for c in y)
        if len(comps) == 0:
            raise ValidationError("vector outcomes must have at least one component")
        if not all(math.isfinite(c) for c in comps):
            raise ValidationError(f"vector outcomes must be finite, got {y!r}")
        return comps
    raise ValidationError(f"unsupported outcome type: {type(y).__name__}")


def outcome_sort_key(y: Outcome):
    """Deterministic total order: numeric ascending, then vectors, then category ids."""
    if isinstance(y, float):
        return (0, y, ())
    if isinstance(y, tuple):
        return (1, float(len(y)), y)
    return (2, float(y.id), ())


def outcome_to_json(y: Outcome):
    if isinstance(y, float):
        return y
    if isinstance(y, tuple):
        return list(y)
    payload = {"cat": y.id}
    if y.name is not None:
        payload["name"] = y.name
    return payload


def outcome_from_json(obj) -> Outcome:
    if isinstance(obj, Mapping):
        return Category(obj["cat"], obj.get("name"))
    return as_outcome(obj)


# ---------------------------------------------------------------------------
# Discrete measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure in canonical form.

    Atoms are pairwise distinct, sorted by :func:`outcome_sort_key`, carry
    strictly positive weights, and the weights sum to one within
    ``WEIGHT_TOL``.  Use :func:`merge_atoms` (or the ``from_*`` builders) to
    canonicalize raw atom lists.
    """

    atoms: tuple[tuple[Outcome, float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("a probability measure needs at least one atom")
        total = 0.0
        prev_key = None
        for y, w in self.atoms:
            if w < 0.0:
                raise ValidationError(f"negative weight {w} at atom {y!r}")
            key = outcome_sort_key(y)
            if prev_key is not None and key <= prev_key:
                raise ValidationError("atoms must be strictly sorted and distinct; "
                                      "use merge_atoms to canonicalize")
            prev_key = key
            total += w
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1 within {WEIGHT_TOL}")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[object, float]]) -> "DiscreteMeasure":
        return merge_atoms(pairs)

    @staticmethod
    def from_mapping(mapping: Mapping[object, float]) -> "DiscreteMeasure":
        return merge_atoms(mapping.items())

    @staticmethod
    def dirac(y) -> "DiscreteMeasure":
        return DiscreteMeasure(((as_outcome(y), 1.0),))

    @staticmethod
    def uniform(outcomes: Sequence) -> "DiscreteMeasure":
        n = len(outcomes)
        if n == 0:
            raise ValidationError("uniform measure needs a nonempty outcome list")
        return merge_atoms((y, 1.0 / n) for y in outcomes)

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(y for y, _ in self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    def mass(self, y) -> float:
        y = as_outcome(y)
        for atom, w in self.atoms:
            if atom == y:
                return w
        return 0.0

    def as_dict(self) -> dict:
        return dict(self.atoms)

    def is_dirac(self) -> bool:
        return len(self.atoms) == 1

    def __len__(self):
        return len(self.atoms)


def merge_atoms(pairs) -> DiscreteMeasure:
    """Canonicalize raw ``(outcome, weight)`` pairs into a :class:`DiscreteMeasure`.

    Equal outcomes are merged by summing weights, zero-weight atoms dropped,
    and the result is sorted.  Idempotent and mass-preserving.
    """
    if isinstance(pairs, DiscreteMeasure):
        pairs = pairs.atoms
    acc: dict[Outcome, float] = {}
    for y, w in pairs:
        w = float(w)
        if w < 0.0:
            raise ValidationError(f"negative weight {w} at atom {y!r}")
        y = as_outcome(y)
        acc[y] = acc.get(y, 0.0) + w
    atoms = tuple(sorted(((y, w) for y, w in acc.items() if w != 0.0),
                         key=lambda kv: outcome_sort_key(kv[0])))
    return DiscreteMeasure(atoms)


def empirical_measure(samples: Sequence) -> DiscreteMeasure:
    """Empirical measure of a sample: distinct values weighted by relative frequency."""
    n = len(samples)
    if n == 0:
        raise ValidationError("cannot build an empirical measure from an empty sample")
    counts = Counter(as_outcome(s) for s in samples)
    return merge_atoms((y, c / n) for y, c in counts.items())


# ---------------------------------------------------------------------------
# Tailed measures on the naturals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailedMeasureN:
    """Probability measure on the naturals with an exact power-law tail.

    The mass function is ``head[y]`` for ``y < cutoff`` and
    ``tail_coeff * (1 + y) ** (-tail_exponent)`` for ``y >= cutoff``.  The
    tail sum is evaluated through the Hurwitz zeta function, so total mass
    and the tail behaviour are exact, never truncated.
    """

    head: tuple[tuple[int, float], ...]
    tail_coeff: float
    tail_exponent: float
    cutoff: int

    def __post_init__(self):
        if self.tail_exponent <= 1.0:
            raise ValidationError("tail exponent must exceed 1 for a summable tail")
        if self.tail_coeff < 0.0:
            raise ValidationError("tail coefficient must be nonnegative")
        if self.cutoff < 0:
            raise ValidationError("cutoff must be a natural number")
        seen = set()
        head_mass = 0.0
        for y, p in self.head:
            if not isinstance(y, int) or y < 0:
                raise ValidationError(f"head outcomes must be naturals, got {y!r}")
            if y >= self.cutoff:
                raise ValidationError(f"head outcome {y} not below cutoff {self.cutoff}")
            if y in seen:
                raise ValidationError(f"duplicate head outcome {y}")
            if p < 0.0:
                raise ValidationError(f"negative head mass {p} at {y}")
            seen.add(y)
            head_mass += p
        total = head_mass + self.tail_mass()
        if abs(total - 1.0) > TAIL_MASS_TOL:
            raise ValidationError(f"total mass {total!r} differs from 1 beyond {TAIL_MASS_TOL}")

    @staticmethod
    def from_head(head: Mapping[int, float], tail_exponent: float,
                  cutoff: int | None = None) -> "TailedMeasureN":
        """Build a tailed measure by solving the tail coefficient from the mass constraint."""
        if cutoff is None:
            cutoff = (max(head) + 1) if head else 0
        head_items = tuple(sorted((int(y), float(p)) for y, p in head.items()))
        head_mass = sum(p for _, p in head_items)
        if head_mass > 1.0 + TAIL_MASS_TOL:
            raise ValidationError(f"head mass {head_mass} exceeds 1")
        z = float(_hurwitz_zeta(tail_exponent, cutoff + 1))
        coeff = max(0.0, (1.0 - head_mass) / z)
        return TailedMeasureN(head=head_items, tail_coeff=coeff,
                              tail_exponent=tail_exponent, cutoff=cutoff)

    @staticmethod
    def power_law(exponent: float = 2.0) -> "TailedMeasureN":
        """Pure power-law measure ``p_y = c (1 + y)^(-exponent)`` on all of N."""
        return TailedMeasureN.from_head({}, exponent, cutoff=0)

    def tail_mass(self) -> float:
        """Exact mass of the tail: ``c * sum_{y >= cutoff} (1 + y)^(-s)``."""
        return self.tail_coeff * float(_hurwitz_zeta(self.tail_exponent, self.cutoff + 1))

    def mass(self, y: int) -> float:
        if y < 0:
            return 0.0
        if y < self.cutoff:
            for h, p in self.head:
                if h == y:
                    return p
            return 0.0
        return self.tail_coeff * (1.0 + y) ** (-self.tail_exponent)

    def tail_liminf(self) -> float:
        """Closed form of ``liminf_{y -> inf} (-y^2 * mass(y))``.

        Zero for a vanishing or faster-than-quadratic tail, ``-c`` for an
        exactly quadratic tail, ``-inf`` for a heavier tail.
        """
        if self.tail_coeff == 0.0 or self.tail_exponent > 2.0:
            return 0.0
        if self.tail_exponent == 2.0:
            return -self.tail_coeff
        return -math.inf

    def sum_of_squared_masses(self) -> float:
        """Exact ``sum_y mass(y)^2`` via the Hurwitz zeta function."""
        head_sq = sum(p * p for _, p in self.head)
        tail_sq = self.tail_coeff ** 2 * float(
            _hurwitz_zeta(2.0 * self.tail_exponent, self.cutoff + 1))
        return head_sq + tail_sq


# ---------------------------------------------------------------------------
# Tagged measure representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atomic:
    measure: DiscreteMeasure


@dataclass(frozen=True)
class Atomless:
    """A measure declared to have no atoms.

    Atomlessness is a representation-level fact carried by the tag, never
    inferred from samples.  The optional sampler draws outcomes from the
    distribution named by the label.
    """

    label: str
    sampler: Callable | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Mixed:
    """Atomic/atomless mixture.

    ``atomic`` holds the normalized atomic conditional; the absolute mass of
    atom ``y`` is ``atomic_mass * atomic.mass(y)``.  ``atomless_parts`` are
    ``(weight, Atomless)`` components whose weights sum to
    ``1 - atomic_mass``.  ``atomic_mass == 0`` is allowed only as the carrier
    for a mixture of distinct atomless labels.
    """

    atomic_mass: float
    atomic: DiscreteMeasure | None
    atomless_parts: tuple[tuple[float, Atomless], ...]

    def __post_init__(self):
        a = self.atomic_mass
        if not (0.0 <= a < 1.0):
            raise ValidationError(f"atomic mass must lie in [0, 1), got {a}")
        if (a > 0.0) != (self.atomic is not None):
            raise ValidationError("atomic part present iff atomic mass is positive")
        if not self.atomless_parts:
            raise ValidationError("a Mixed measure needs at least one atomless part")
        rest = sum(w for w, _ in self.atomless_parts)
        if any(w < 0.0 for w, _ in self.atomless_parts):
            raise ValidationError("atomless component weights must be nonnegative")
        if abs(a + rest - 1.0) > WEIGHT_TOL:
            raise ValidationError(
                f"atomic mass {a} plus atomless mass {rest} differs from 1")

    def atom_masses(self) -> tuple[tuple[Outcome, float], ...]:
        """Absolute atom masses ``atomic_mass * weight``."""
        if self.atomic is None:
            return ()
        return tuple((y, self.atomic_mass * w) for y, w in self.atomic.atoms)


@dataclass(frozen=True)
class TailedN:
    measure: TailedMeasureN


MeasureRepr = Union[Atomic, Atomless, Mixed, TailedN]


def dirac(y) -> Atomic:
    return Atomic(DiscreteMeasure.dirac(y))


# ---------------------------------------------------------------------------
# Random measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMixture:
    """Random measure equal to component ``i`` with probability ``w_i``."""

    components: tuple[tuple[float, MeasureRepr], ...]

    def __post_init__(self):
        if not self.components:
            raise ValidationError("a finite mixture needs at least one component")
        total = 0.0
        for w, _ in self.components:
            if w < 0.0:
                raise ValidationError(f"negative mixture weight {w}")
            total += w
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"mixture weights sum to {total!r}, expected 1")

    @staticmethod
    def of(*pairs) -> "FiniteMixture":
        return FiniteMixture(tuple((float(w), m) for w, m in pairs))


@dataclass(frozen=True)
class DiracPushforward:
    """Random measure ``delta_X`` with ``X`` drawn from ``law``."""

    law: DiscreteMeasure | TailedMeasureN


@dataclass(frozen=True)
class SymmetrizedDiracPair:
    """Random measure ``(delta_{-X} + delta_X) / 2`` with ``X ~ Exponential(rate)``."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0.0):
            raise ValidationError(f"exponential rate must be positive, got {self.rate}")

    @property
    def intensity_label(self) -> str:
        return f"Laplace({self.rate:g})"


RandomMeasure = Union[FiniteMixture, DiracPushforward, SymmetrizedDiracPair]


def mix(lam: float, first: MeasureRepr, second: MeasureRepr) -> MeasureRepr:
    """Pointwise mixture ``lam * first + (1 - lam) * second``."""
    if not (0.0 <= lam <= 1.0):
        raise PreconditionError(f"mixing weight must lie in [0, 1], got {lam}")
    return intensity(FiniteMixture.of((lam, first), (1.0 - lam, second)))


def intensity(rm: RandomMeasure) -> MeasureRepr:
    """Intensity measure of a random measure: ``B -> E(nu(B))``.

    Finite mixtures are merged pointwise.  Atomic masses accumulate exactly
    in component order; same-label atomless parts merge, distinct labels stay
    as a tagged list inside a :class:`Mixed` result.  Tailed components merge
    when their exponents agree (finitely many atomic-on-N atoms are absorbed
    into the head); mixing distinct tail exponents is not representable and
    raises.
    """
    if isinstance(rm, DiracPushforward):
        if isinstance(rm.law, DiscreteMeasure):
            return Atomic(rm.law)
        return TailedN(rm.law)
    if isinstance(rm, SymmetrizedDiracPair):
        return Atomless(rm.intensity_label)

    atom_acc: dict[Outcome, float] = {}
    atomless_acc: dict[str, float] = {}
    atomless_reprs: dict[str, Atomless] = {}
    tailed_parts: list[tuple[float, TailedMeasureN]] = []

    for w, part in rm.components:
        if isinstance(part, Atomic):
            for y, p in part.measure.atoms:
                atom_acc[y] = atom_acc.get(y, 0.0) + w * p
        elif isinstance(part, Atomless):
            atomless_acc[part.label] = atomless_acc.get(part.label, 0.0) + w
            atomless_reprs.setdefault(part.label, part)
        elif isinstance(part, Mixed):
            for y, p in part.atom_masses():
                atom_acc[y] = atom_acc.get(y, 0.0) + w * p
            for wa, al in part.atomless_parts:
                atomless_acc[al.label] = atomless_acc.get(al.label, 0.0) + w * wa
                atomless_reprs.setdefault(al.label, al)
        elif isinstance(part, TailedN):
            tailed_parts.append((w, part.measure))
        else:
            raise ValidationError(f"unknown measure representation: {part!r}")

    if tailed_parts:
        if atomless_acc:
            raise UnsupportedRepresentationError(
                "cannot mix tailed and atomless components")
        return TailedN(_merge_tailed(tailed_parts, atom_acc))

    atoms = tuple(sorted(((y, p) for y, p in atom_acc.items() if p != 0.0),
                         key=lambda kv: outcome_sort_key(kv[0])))
    atomless = tuple((atomless_acc[label], atomless_reprs[label])
                     for label in atomless_acc if atomless_acc[label] != 0.0)

    if not atomless:
        return Atomic(DiscreteMeasure(atoms))
    if not atoms:
        if len(atomless) == 1:
            return atomless[0][1]
        total = sum(w for w, _ in atomless)
        parts = tuple((w / total, al) for w, al in atomless)
        return Mixed(atomic_mass=0.0, atomic=None, atomless_parts=parts)

    a = sum(p for _, p in atoms)
    normalized = DiscreteMeasure(tuple((y, p / a) for y, p in atoms))
    return Mixed(atomic_mass=a, atomic=normalized, atomless_parts=atomless)


def _merge_tailed(tailed_parts: list[tuple[float, TailedMeasureN]],
                  atom_acc: dict[Outcome, float]) -> TailedMeasureN:
    exponents = {t.tail_exponent for _, t in tailed_parts}
    if len(exponents) > 1:
        raise UnsupportedRepresentationError(
            "mixtures of tailed measures with distinct exponents are not "
            "representable as a single tailed measure")
    s = exponents.pop()

    nat_atoms: dict[int, float] = {}
    for y, p in atom_acc.items():
        if not (isinstance(y, float) and y >= 0.0 and y == int(y)):
            raise UnsupportedRepresentationError(
                "atomic components mixed with tailed measures must live on the naturals")
        nat_atoms[int(y)] = p

    cutoff = max([t.cutoff for _, t in tailed_parts]
                 + [y + 1 for y in nat_atoms] + [0])
    coeff = sum(w * t.tail_coeff for w, t in tailed_parts)
    head: dict[int, float] = {}
    for y in range(cutoff):
        p = nat_atoms.get(y, 0.0) + sum(w * t.mass(y) for w, t in tailed_parts)
        if p != 0.0:
            head[y] = p
    return TailedMeasureN(head=tuple(sorted(head.items())), tail_coeff=coeff,
                          tail_exponent=s, cutoff=cutoff)


def sample_realization(rm: RandomMeasure, rng: np.random.Generator) -> MeasureRepr:
    """Draw one realization of a random measure."""
    if isinstance(rm, FiniteMixture):
        u = rng.random()
        acc = 0.0
        for w, part in rm.components:
            acc += w
            if u < acc:
                return part
        return rm.components[-1][1]
    if isinstance(rm, DiracPushforward):
        if isinstance(rm.law, TailedMeasureN):
            raise UnsupportedRepresentationError(
                "sampling from a tailed law is not supported")
        u = rng.random()
        acc = 0.0
        for y, w in rm.law.atoms:
            acc += w
            if u < acc:
                return dirac(y)
        return dirac(rm.law.atoms[-1][0])
    if isinstance(rm, SymmetrizedDiracPair):
        x = 0.0
        while x == 0.0:
            x = rng.exponential(1.0 / rm.rate)
        return Atomic(merge_atoms([(-x, 0.5), (x, 0.5)]))
    raise ValidationError(f"unknown random measure: {rm!r}")


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def measure_to_json(m: MeasureRepr | DiscreteMeasure) -> dict:
    """Tagged JSON form; lossless for weights representable in binary floating point."""
    if isinstance(m, DiscreteMeasure):
        m = Atomic(m)
    if isinstance(m, Atomic):
        return {"type": "atomic",
                "atoms": [{"y": outcome_to_json(y), "p": w} for y, w in m.measure.atoms]}
    if isinstance(m, Atomless):
        return {"type": "atomless", "label": m.label}
    if isinstance(m, TailedN):
        t = m.measure
        return {"type": "tailed_n",
                "head": {str(y): p for y, p in t.head},
                "c": t.tail_coeff, "s": t.tail_exponent, "y0": t.cutoff}
    if isinstance(m, Mixed):
        return {"type": "mixed",
                "atomic_mass": m.atomic_mass,
                "atoms": ([{"y": outcome_to_json(y), "p": w} for y, w in m.atomic.atoms]
                          if m.atomic is not None else []),
                "atomless": [{"w": w, "label": al.label} for w, al in m.atomless_parts]}
    raise ValidationError(f"cannot serialize {m!r}")


def measure_from_json(obj: Mapping) -> MeasureRepr:
    kind = obj.get("type")
    if kind == "atomic":
        atoms = [(outcome_from_json(a["y"]), float(a["p"])) for a in obj["atoms"]]
        return Atomic(merge_atoms(atoms))
    if kind == "atomless":
        return Atomless(obj["label"])
    if kind == "tailed_n":
        head = tuple(sorted((int(y), float(p)) for y, p in obj["head"].items()))
        return TailedN(TailedMeasureN(head=head, tail_coeff=float(obj["c"]),
                                      tail_exponent=float(obj["s"]), cutoff=int(obj["y0"])))
    if kind == "mixed":
        atoms = [(outcome_from_json(a["y"]), float(a["p"])) for a in obj["atoms"]]
        atomic = merge_atoms(atoms) if atoms else None
        parts = tuple((float(p["w"]), Atomless(p["label"])) for p in obj["atomless"])
        return Mixed(atomic_mass=float(obj["atomic_mass"]), atomic=atomic,
                     atomless_parts=parts)
    raise ValidationError(f"unknown measure type {kind!r}")
