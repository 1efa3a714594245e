import math

import numpy as np
import pytest

from ufx import (Atomic, Atomless, DiscreteMeasure, DomainError, Mixed,
                 SymmetrizedDiracPair, TailedMeasureN, TailedN, ce1_demo,
                 ce1_mixture_value, ce1_tail_liminf, ce1_value, ce2_demo,
                 ce2_value, dirac, intensity, merge_atoms, mix,
                 sample_realization)

SIX_OVER_PI_SQ = 6.0 / math.pi ** 2


class TestCe1Value:
    def test_paper_law(self):
        t = TailedN(TailedMeasureN.power_law(2.0))
        assert ce1_value(t) == pytest.approx(-SIX_OVER_PI_SQ, abs=1e-12)

    def test_dirac_is_zero(self):
        assert ce1_value(dirac(7)) == 0.0

    def test_heavy_tail_patched_to_zero(self):
        t = TailedN(TailedMeasureN.from_head({0: 0.7}, 1.5))
        assert ce1_tail_liminf(t) == -math.inf
        assert ce1_value(t) == 0.0

    def test_light_tail_is_zero(self):
        t = TailedN(TailedMeasureN.from_head({}, 3.0))
        assert ce1_value(t) == 0.0

    def test_finite_support_is_zero(self):
        assert ce1_value(Atomic(merge_atoms([(0, 0.5), (5, 0.5)]))) == 0.0

    def test_non_natural_outcome_rejected(self):
        with pytest.raises(DomainError):
            ce1_value(dirac(1.5))
        with pytest.raises(DomainError):
            ce1_value(dirac(-2))

    def test_range_is_nonpositive(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            s = float(rng.choice([1.5, 2.0, 2.5, 3.0]))
            head_mass = float(rng.uniform(0, 0.9))
            t = TailedN(TailedMeasureN.from_head({0: head_mass}, s))
            assert ce1_value(t) <= 0.0


class TestCe1Concavity:
    def test_equal_exponent_two_mixture_is_linear(self):
        a = TailedMeasureN.from_head({0: 0.5}, 2.0)
        b = TailedMeasureN.power_law(2.0)
        lam = 0.3
        mixture = mix(lam, TailedN(a), TailedN(b))
        got = ce1_value(mixture)
        expected = lam * ce1_value(TailedN(a)) + (1 - lam) * ce1_value(TailedN(b))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_cross_exponent_closed_form(self):
        # s = 2 mixed with s = 3: only the quadratic tail survives the liminf
        a = TailedMeasureN.power_law(2.0)
        b = TailedMeasureN.power_law(3.0)
        lam = 0.25
        got = ce1_mixture_value([(lam, TailedN(a)), (1 - lam, TailedN(b))])
        assert got == pytest.approx(-lam * a.tail_coeff, abs=1e-14)
        expected_hull = lam * ce1_value(TailedN(a)) + (1 - lam) * ce1_value(TailedN(b))
        assert got >= expected_hull - 1e-12

    def test_subquadratic_component_dominates(self):
        a = TailedMeasureN.power_law(1.5)
        b = TailedMeasureN.power_law(2.0)
        got = ce1_mixture_value([(0.5, TailedN(a)), (0.5, TailedN(b))])
        assert got == 0.0  # liminf -inf, patched branch wins the inequality
        assert got >= 0.5 * ce1_value(TailedN(a)) + 0.5 * ce1_value(TailedN(b))

    def test_mixture_with_atoms(self):
        a = TailedMeasureN.power_law(2.0)
        got = ce1_mixture_value([(0.5, TailedN(a)), (0.5, dirac(3))])
        assert got == pytest.approx(-0.5 * a.tail_coeff, abs=1e-14)
        # agrees with the representable-route evaluation
        assert got == pytest.approx(
            ce1_value(mix(0.5, TailedN(a), dirac(3))), abs=1e-14)

    def test_random_trials(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            s = float(rng.choice([2.0, 2.5, 3.0]))
            heads = [{0: float(rng.uniform(0, 0.8))}, {}]
            a = TailedN(TailedMeasureN.from_head(heads[0], s))
            b = TailedN(TailedMeasureN.from_head(heads[1], s))
            lam = float(rng.uniform())
            got = ce1_value(mix(lam, a, b))
            assert got >= lam * ce1_value(a) + (1 - lam) * ce1_value(b) - 1e-12


class TestCe2Value:
    def test_symmetric_pair_is_half(self):
        m = Atomic(merge_atoms([(-1.7, 0.5), (1.7, 0.5)]))
        assert ce2_value(m) == 0.5

    def test_atomless_is_zero(self):
        assert ce2_value(Atomless("Laplace(1)")) == 0.0

    def test_dirac_is_zero(self):
        assert ce2_value(dirac(0)) == 0.0

    def test_mixed_uses_absolute_masses(self):
        m = Mixed(atomic_mass=0.5, atomic=merge_atoms([(2.0, 1.0)]),
                  atomless_parts=((0.5, Atomless("L")),))
        assert ce2_value(m) == pytest.approx(0.5 * 0.5, abs=1e-15)

    def test_tailed_closed_form(self):
        t = TailedMeasureN.power_law(2.0)
        got = ce2_value(TailedN(t))
        c = t.tail_coeff
        from scipy.special import zeta
        assert got == pytest.approx(1.0 - c ** 2 * float(zeta(4.0, 1.0)), abs=1e-14)

    def test_uniform_approaches_one(self):
        for m in (2, 4, 10, 100):
            u = Atomic(DiscreteMeasure.uniform(list(range(m))))
            assert ce2_value(u) == pytest.approx(1 - 1 / m, abs=1e-12)
            assert ce2_value(u) < 1.0

    def test_bounded_by_one(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            size = int(rng.integers(1, 9))
            w = rng.dirichlet(np.ones(size))
            m = Atomic(merge_atoms(zip(map(float, range(size)), w)))
            assert 0.0 <= ce2_value(m) < 1.0

    def test_concavity_atomic_and_mixed(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            size = int(rng.integers(1, 6))
            a = Atomic(merge_atoms(zip(map(float, rng.choice(8, size, replace=False)),
                                       rng.dirichlet(np.ones(size)))))
            if rng.random() < 0.5:
                b = Atomless("Laplace(1)")
            else:
                size_b = int(rng.integers(1, 6))
                b = Atomic(merge_atoms(zip(map(float, rng.choice(8, size_b, replace=False)),
                                           rng.dirichlet(np.ones(size_b)))))
            lam = float(rng.uniform())
            got = ce2_value(mix(lam, a, b))
            hull = lam * ce2_value(a) + (1 - lam) * ce2_value(b)
            assert got >= hull - 1e-12


class TestDemos:
    def test_ce1_closed_form(self):
        rep = ce1_demo()
        assert rep.H_bar == pytest.approx(-SIX_OVER_PI_SQ, abs=1e-12)
        assert rep.E_H == 0.0
        assert rep.violated
        assert rep.margin == pytest.approx(SIX_OVER_PI_SQ, abs=1e-12)

    def test_ce1_intensity_is_paper_law(self):
        rep = ce1_demo()
        t = rep.intensity_repr.measure
        assert t.head == () and t.tail_exponent == 2.0
        assert t.tail_coeff == pytest.approx(SIX_OVER_PI_SQ, abs=1e-14)

    def test_ce2_exact_values(self):
        rep = ce2_demo()
        assert rep.H_bar == 0.0
        assert rep.E_H == 0.5
        assert rep.violated and rep.margin == 0.5

    def test_ce2_intensity_is_atomless_laplace(self):
        rep = ce2_demo()
        assert rep.intensity_repr == Atomless("Laplace(1)")

    def test_ce2_monte_carlo_cross_check(self):
        # the realization value is a.s. constant, so the sample mean is exact
        rng = np.random.default_rng(17)
        rm = SymmetrizedDiracPair(rate=1.0)
        values = [ce2_value(sample_realization(rm, rng)) for _ in range(10_000)]
        assert all(v == 0.5 for v in values)
        assert sum(values) / len(values) == 0.5

    def test_demo_reports_serialize(self):
        import json
        for rep in (ce1_demo(), ce2_demo()):
            payload = rep.to_json()
            assert set(payload) >= {"H_bar", "E_H", "violated", "margin"}
            json.dumps(payload)
