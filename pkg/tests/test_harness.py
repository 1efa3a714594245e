import json
import math

import numpy as np
import pytest

from ufx import (Atomic, CapabilityError, FunctionalHandle, GeneratorConfig,
                 JointPmf, MixtureWitness, UserTable, ValidationError,
                 check_concavity, check_dirac_vanishing, check_doa_from_joint,
                 check_jensen, dirac, functional_from_spec, merge_atoms,
                 quf_value, recompute_margin)

PHI_SPECS = [{"phi": "shannon"}, {"phi": "tsallis", "alpha": 1.5},
             {"phi": "tsallis", "alpha": 2.0}, {"phi": "gini_simpson"}]
QUF_SPECS = [{"kernel": "squared_half"}, {"kernel": "abs_diff"},
             {"kernel": {"fractional": 1.0}}, {"kernel": "discrete01"}]
LOSS_SPECS = [{"loss": "zero_one"}, {"loss": "quadratic"}]


class TestCheckJensen:
    @pytest.mark.parametrize("spec", PHI_SPECS + QUF_SPECS + LOSS_SPECS)
    def test_jensen_functionals_pass(self, spec):
        verdict = check_jensen(functional_from_spec(spec), trials=200, rng_seed=5)
        assert verdict.passed
        assert verdict.worst_margin >= -1e-10
        assert verdict.witness is None

    def test_null_functional_all_margins_zero(self):
        verdict = check_jensen(functional_from_spec({"null": True}),
                               trials=100, rng_seed=5)
        assert verdict.passed and verdict.worst_margin == 0.0

    def test_ce2_fails_with_exact_witness(self):
        verdict = check_jensen(functional_from_spec({"ce": "ce2"}),
                               GeneratorConfig(kind="symmetrized_pair"),
                               trials=10, rng_seed=5)
        assert not verdict.passed
        assert verdict.worst_margin == -0.5
        assert verdict.witness is not None
        assert verdict.witness.margin == -0.5

    def test_ce1_fails_via_pushforward(self):
        verdict = check_jensen(functional_from_spec({"ce": "ce1"}),
                               GeneratorConfig(kind="dirac_pushforward"),
                               trials=3, rng_seed=5)
        assert not verdict.passed
        assert verdict.worst_margin == pytest.approx(-6 / math.pi ** 2, abs=1e-12)

    def test_capability_mismatch(self):
        with pytest.raises(CapabilityError):
            check_jensen(functional_from_spec({"phi": "shannon"}),
                         GeneratorConfig(kind="symmetrized_pair"),
                         trials=1, rng_seed=0)

    def test_deterministic(self):
        h = functional_from_spec({"phi": "gini_simpson"})
        a = check_jensen(h, trials=50, rng_seed=9)
        b = check_jensen(h, trials=50, rng_seed=9)
        assert a == b

    def test_witness_recomputable_and_serializable(self):
        h = functional_from_spec({"ce": "ce2"})
        verdict = check_jensen(h, GeneratorConfig(kind="symmetrized_pair"),
                               trials=5, rng_seed=5)
        w = verdict.witness
        assert recompute_margin(h, w) == w.margin
        round_trip = MixtureWitness.from_json(json.loads(json.dumps(w.to_json())))
        assert recompute_margin(h, round_trip) == w.margin


class TestCheckDoa:
    def test_hand_example(self):
        joint = JointPmf.from_arrays([[0.4, 0.1], [0.1, 0.4]], [0.0, 1.0], ["a", "b"])
        verdict = check_doa_from_joint(functional_from_spec({"phi": "gini_simpson"}),
                                       joint)
        assert verdict.passed
        assert verdict.worst_margin == pytest.approx(0.18, abs=1e-12)

    def test_independent_joint_margin_zero(self):
        # dyadic marginals keep row normalization exact, so the margin is 0.0
        px = [0.5, 0.5]
        py = [0.25, 0.75]
        joint = JointPmf.from_arrays([[px[0] * p for p in py],
                                      [px[1] * p for p in py]], [0.0, 1.0])
        for spec in PHI_SPECS + QUF_SPECS:
            verdict = check_doa_from_joint(functional_from_spec(spec), joint)
            assert verdict.worst_margin == 0.0

    def test_deterministic_output_margin_is_total(self):
        joint = JointPmf.from_arrays([[0.3, 0.0], [0.0, 0.7]], [0.0, 1.0])
        h = functional_from_spec({"kernel": "squared_half"})
        verdict = check_doa_from_joint(h, joint)
        marginal = Atomic(merge_atoms([(0.0, 0.3), (1.0, 0.7)]))
        assert verdict.worst_margin == pytest.approx(h.evaluate(marginal), abs=1e-15)

    def test_zero_joint_rejected(self):
        with pytest.raises(ValidationError):
            JointPmf.from_arrays([[0.0, 0.0]], [0.0, 1.0])

    def test_zero_rows_pruned(self):
        joint = JointPmf.from_arrays([[0.5, 0.5], [0.0, 0.0]], [0.0, 1.0])
        verdict = check_doa_from_joint(functional_from_spec({"phi": "shannon"}), joint)
        assert verdict.passed


class TestCheckConcavity:
    @pytest.mark.parametrize("spec", PHI_SPECS + QUF_SPECS + LOSS_SPECS)
    def test_jensen_functionals_are_concave(self, spec):
        verdict = check_concavity(functional_from_spec(spec), trials=200, rng_seed=7)
        assert verdict.passed

    def test_ce1_concave_but_not_jensen(self):
        h = functional_from_spec({"ce": "ce1"})
        assert check_concavity(h, trials=300, rng_seed=7).passed
        jensen = check_jensen(h, GeneratorConfig(kind="dirac_pushforward"),
                              trials=3, rng_seed=7)
        assert not jensen.passed

    def test_ce2_concave_but_not_jensen(self):
        h = functional_from_spec({"ce": "ce2"})
        assert check_concavity(h, trials=300, rng_seed=7).passed
        jensen = check_jensen(h, GeneratorConfig(kind="symmetrized_pair"),
                              trials=3, rng_seed=7)
        assert not jensen.passed

    def test_non_concave_functional_fails_with_witness(self):
        # sum of squared masses is strictly convex, so mixing distinct
        # measures must produce a negative margin and a replayable witness
        def sum_of_squares(mr):
            return float(sum(w * w for _, w in mr.measure.atoms))

        h = FunctionalHandle(name="sum_of_squares", evaluate=sum_of_squares)
        verdict = check_concavity(h, trials=100, rng_seed=7)
        assert not verdict.passed
        assert verdict.witness is not None
        assert recompute_margin(h, verdict.witness) == verdict.witness.margin

    def test_jensen_two_point_trials_reused_as_concavity(self):
        # a two-component mixture drawn by the Jensen generator is exactly a
        # concavity trial; cross-validate the margins agree
        h = functional_from_spec({"phi": "gini_simpson"})
        rng = np.random.default_rng(3)
        from ufx import FiniteMixture, intensity
        for _ in range(100):
            support = rng.choice(9, size=int(rng.integers(1, 9)), replace=False)
            a = merge_atoms(zip(map(float, support), rng.dirichlet(np.ones(len(support)))))
            b = merge_atoms(zip(map(float, support), rng.dirichlet(np.ones(len(support)))))
            lam = float(rng.uniform())
            rm = FiniteMixture.of((lam, Atomic(a)), (1 - lam, Atomic(b)))
            jensen_margin = (h.evaluate(intensity(rm))
                             - lam * h.evaluate(Atomic(a))
                             - (1 - lam) * h.evaluate(Atomic(b)))
            assert jensen_margin >= -1e-10


class TestDiracVanishing:
    @pytest.mark.parametrize("spec", PHI_SPECS + QUF_SPECS + LOSS_SPECS)
    def test_builtins_vanish(self, spec):
        outcomes = [0.0, 1.0, 5.0]
        verdict = check_dirac_vanishing(functional_from_spec(spec), outcomes)
        assert verdict.passed

    def test_nonzero_diagonal_table_fails(self):
        kernel = UserTable.from_arrays([0, 1], [[1.0, 2.0], [2.0, 0.0]])
        h = FunctionalHandle(name="bad_table",
                             evaluate=lambda mr: quf_value(kernel, mr.measure))
        verdict = check_dirac_vanishing(h, [0.0, 1.0])
        assert not verdict.passed
        assert verdict.witness is not None
        # H(delta_0) equals the diagonal entry
        assert verdict.witness.intensity_value == 1.0

    def test_verdict_serializes(self):
        verdict = check_dirac_vanishing(functional_from_spec({"phi": "shannon"}),
                                        [0.0, 1.0])
        json.dumps(verdict.to_json())
