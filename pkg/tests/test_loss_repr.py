import math

import numpy as np
import pytest

from ufx import (GiniSimpson, PreconditionError, Shannon, SimplexFunctional,
                 Tsallis, ValidationError, build_loss_representation,
                 extended_dot, min_affine_value, phi_simplex_functional,
                 representation_gap, supporting_vector)

INF = math.inf


def simplex_grid(m, steps):
    """All probability vectors with coordinates k/steps (includes the boundary)."""
    if m == 1:
        return [np.array([1.0])]
    points = []

    def rec(prefix, remaining, left):
        if remaining == 1:
            points.append(np.array(prefix + [left / steps]))
            return
        for k in range(left + 1):
            rec(prefix + [k / steps], remaining - 1, left - k)

    rec([], m, steps)
    return points


class TestExtendedDot:
    def test_inf_entry_off_support_ignored(self):
        assert extended_dot(np.array([1.0, INF]), np.array([1.0, 0.0])) == 1.0

    def test_inf_entry_on_support_dominates(self):
        assert extended_dot(np.array([1.0, INF]), np.array([0.5, 0.5])) == INF


class TestSupportingVector:
    def test_gini_m2_center(self):
        F = phi_simplex_functional(GiniSimpson(), 2)
        phi = supporting_vector(F, [0.5, 0.5])
        np.testing.assert_allclose(phi, [0.5, 0.5], atol=1e-15)

    def test_gini_m3_uniform(self):
        F = phi_simplex_functional(GiniSimpson(), 3)
        phi = supporting_vector(F, [1 / 3, 1 / 3, 1 / 3])
        np.testing.assert_allclose(phi, [2 / 3, 2 / 3, 2 / 3], atol=1e-12)
        # the constant plane 2/3 majorizes 1 - |nu|^2 on the whole simplex
        for nu in simplex_grid(3, 8):
            assert extended_dot(phi, nu) >= F.fn(nu) - 1e-12

    def test_zero_functional(self):
        F = SimplexFunctional(m=3, fn=lambda nu: 0.0, name="null")
        phi = supporting_vector(F, [0.2, 0.3, 0.5])
        np.testing.assert_allclose(phi, np.zeros(3), atol=1e-12)

    def test_gini_formula_matches_analytic(self):
        # phi_j = 1 + |nu0|^2 - 2 nu0_j from the analytic supergradient
        F = phi_simplex_functional(GiniSimpson(), 4)
        rng = np.random.default_rng(3)
        for _ in range(50):
            nu0 = rng.dirichlet(np.ones(4))
            nu0 = np.maximum(nu0, 1e-3)
            nu0 /= nu0.sum()
            phi = supporting_vector(F, nu0)
            expected = 1 + float(nu0 @ nu0) - 2 * nu0
            np.testing.assert_allclose(phi, expected, atol=1e-12)

    def test_boundary_anchor_rejected(self):
        F = phi_simplex_functional(GiniSimpson(), 2)
        with pytest.raises(PreconditionError):
            supporting_vector(F, [1.0, 0.0])

    def test_infinite_functional_distinguished_result(self):
        F = SimplexFunctional(m=2, fn=lambda nu: INF, name="inf")
        phi = supporting_vector(F, [0.5, 0.5])
        assert np.all(np.isinf(phi))

    def test_fd_fallback_matches_analytic_gradient(self):
        spec = GiniSimpson()
        with_grad = phi_simplex_functional(spec, 3)
        without = SimplexFunctional(m=3, fn=with_grad.fn, name="fd")
        rng = np.random.default_rng(5)
        for _ in range(20):
            nu0 = rng.dirichlet(np.ones(3))
            nu0 = np.maximum(nu0, 1e-2)
            nu0 /= nu0.sum()
            # central differences are exact for quadratics up to rounding
            np.testing.assert_allclose(supporting_vector(without, nu0),
                                       supporting_vector(with_grad, nu0),
                                       atol=1e-9)

    def test_fd_fallback_is_safe_near_boundary(self):
        F = SimplexFunctional(m=2, fn=phi_simplex_functional(Shannon(), 2).fn,
                              name="fd_shannon")
        nu0 = np.array([1e-6, 1.0 - 1e-6])
        phi = supporting_vector(F, nu0)  # must not evaluate outside the simplex
        assert np.all(np.isfinite(phi)) and np.all(phi >= 0.0)


class TestBuildRepresentation:
    def test_base_case_m1(self):
        F = SimplexFunctional(m=1, fn=lambda nu: 0.75, name="const")
        rep = build_loss_representation(F, anchors_per_level=5, rng_seed=0)
        assert len(rep.vectors) == 1
        np.testing.assert_allclose(rep.vectors[0], [0.75])

    def test_gini_m2_face_vectors(self):
        F = phi_simplex_functional(GiniSimpson(), 2)
        rep = build_loss_representation(F, anchors_per_level=3, rng_seed=1)
        as_tuples = {tuple(v) for v in rep.vectors}
        assert (0.0, INF) in as_tuples and (INF, 0.0) in as_tuples

    def test_zero_functional_any_m(self):
        for m in (1, 2, 3):
            F = SimplexFunctional(m=m, fn=lambda nu: 0.0, name="null")
            rep = build_loss_representation(F, anchors_per_level=4, rng_seed=2)
            for nu in simplex_grid(m, 6):
                assert min_affine_value(rep.vectors, nu) == pytest.approx(0.0, abs=1e-12)

    def test_constant_infinite_functional(self):
        F = SimplexFunctional(m=2, fn=lambda nu: INF, name="inf")
        rep = build_loss_representation(F, anchors_per_level=2, rng_seed=3)
        for nu in simplex_grid(2, 4):
            assert min_affine_value(rep.vectors, nu) == INF

    def test_deterministic(self):
        F = phi_simplex_functional(Shannon(), 3)
        a = build_loss_representation(F, anchors_per_level=10, rng_seed=9)
        b = build_loss_representation(F, anchors_per_level=10, rng_seed=9)
        assert all(np.array_equal(x, y) for x, y in zip(a.vectors, b.vectors))

    @pytest.mark.parametrize("spec", [GiniSimpson(), Shannon(), Tsallis(1.5)])
    @pytest.mark.parametrize("m", [2, 3])
    def test_majorant_and_nonnegativity(self, spec, m):
        F = phi_simplex_functional(spec, m)
        rep = build_loss_representation(F, anchors_per_level=40, rng_seed=11)
        for phi in rep.vectors:
            assert np.all((phi >= 0.0) | np.isinf(phi))
        rng = np.random.default_rng(13)
        pts = [rng.dirichlet(np.ones(m)) for _ in range(300)] + simplex_grid(m, 6)
        for nu in pts:
            assert min_affine_value(rep.vectors, nu) >= F.fn(nu) - 1e-9

    def test_face_lift_preserves_values_exactly(self):
        # inserting +inf at the vanishing coordinate leaves face values
        # untouched and blows up off the face
        rng = np.random.default_rng(19)
        for _ in range(100):
            m = int(rng.integers(2, 5))
            phi0 = rng.uniform(0, 3, size=m - 1)
            sub = rng.dirichlet(np.ones(m - 1))
            k = int(rng.integers(0, m))
            lifted = np.insert(phi0, k, INF)
            on_face = np.insert(sub, k, 0.0)
            assert extended_dot(lifted, on_face) == extended_dot(phi0, sub)
            off_face = np.insert(sub * 0.9, k, 0.1)
            assert extended_dot(lifted, off_face) == INF

    def test_face_value_matches_restricted_envelope(self):
        # the full envelope restricted to a face equals an envelope of the
        # restricted functional: exact at face anchors, majorant in between
        F3 = phi_simplex_functional(GiniSimpson(), 3)
        rep3 = build_loss_representation(F3, anchors_per_level=60, rng_seed=17,
                                         anchor_placement="grid")
        rng = np.random.default_rng(19)
        for _ in range(40):
            sub = rng.dirichlet(np.ones(2))
            for k in range(3):
                nu = np.insert(sub, k, 0.0)
                v3 = min_affine_value(rep3.vectors, nu)
                assert v3 >= F3.fn(nu) - 1e-9


class TestRepresentationGap:
    def test_gini_m2_dense_anchor_set(self):
        F = phi_simplex_functional(GiniSimpson(), 2)
        rep = build_loss_representation(F, anchors_per_level=50, rng_seed=23)
        rng = np.random.default_rng(29)
        pts = ([rng.dirichlet(np.ones(2)) for _ in range(1000)]
               + [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        gap = representation_gap(F, rep, pts)
        assert gap.max_undershoot <= 1e-9
        assert gap.gap_at_anchors <= 1e-9

    def test_shannon_m3_interior_gap_grid_anchors(self):
        from ufx.loss_repr import grid_anchor_pitch, interior_simplex_grid
        F = phi_simplex_functional(Shannon(), 3)
        rep = build_loss_representation(F, anchors_per_level=200, rng_seed=31,
                                        anchor_placement="grid")
        pts = interior_simplex_grid(3, grid_anchor_pitch(3, 200))
        gap = representation_gap(F, rep, pts, interior_min_coord=0.05)
        assert gap.max_undershoot <= 1e-9
        assert gap.sup_gap_interior <= 1e-3

    def test_shannon_m3_between_anchor_gap_is_coarse(self):
        # between anchors the tangent envelope sits visibly above the target:
        # a 200-anchor budget cannot reach 1e-3 on offset grids (the gap is a
        # KL divergence to the nearest anchor), so document the real scale
        F = phi_simplex_functional(Shannon(), 3)
        rep = build_loss_representation(F, anchors_per_level=200, rng_seed=31)
        pts = [p for p in simplex_grid(3, 20)]
        gap = representation_gap(F, rep, pts, interior_min_coord=0.05)
        assert gap.max_undershoot <= 1e-9
        assert 1e-4 <= gap.sup_gap_interior <= 5e-2

    def test_empty_points_rejected(self):
        F = phi_simplex_functional(GiniSimpson(), 2)
        rep = build_loss_representation(F, anchors_per_level=3, rng_seed=1)
        with pytest.raises(PreconditionError):
            representation_gap(F, rep, [])


class TestValidation:
    def test_non_concave_callback_rejected(self):
        with pytest.raises(ValidationError):
            SimplexFunctional(m=2, fn=lambda nu: float(np.max(nu)), name="max")

    def test_negative_callback_rejected(self):
        with pytest.raises(ValidationError):
            SimplexFunctional(m=2, fn=lambda nu: -1.0, name="neg")

    def test_bad_simplex_point(self):
        F = phi_simplex_functional(GiniSimpson(), 2)
        with pytest.raises(ValidationError):
            supporting_vector(F, [0.5, 0.6])
