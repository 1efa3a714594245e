"""Uncertainty functionals on probability measures.

Trace-form entropies, quadratic functionals with conditionally negative
definite kernels, expected-loss (minimal posterior risk) functionals,
closed-form counterexamples to the mixture inequality, a property-testing
harness, constructive min-of-affine loss representations on the simplex, and
generalized first-order sensitivity indices.
"""

__version__ = "0.1.0"

from .counterexamples import (JensenViolationReport, ce1_demo, ce1_mixture_value,
                              ce1_tail_liminf, ce1_value, ce2_demo, ce2_value)
from .entropy import (GiniSimpson, PhiSpec, Shannon, Tsallis, UserConcave,
                      phi_entropy, phi_jensen_difference, phi_spec_from_json)
from .errors import (BinningError, CapabilityError, ComputationError,
                     DegenerateOutputError, DomainError, EstimatorError,
                     PreconditionError, SelfCheckError, UfxError,
                     UnsupportedRepresentationError, ValidationError)
from .expected_loss import (ExpectedLossResult, FiniteTable, LossSpec,
                            QuadraticScalar, ScoringRuleView, ZeroOne,
                            expected_loss_value, extended_expectation,
                            loss_from_json, scoring_rule_view)
from .harness import (FunctionalHandle, GeneratorConfig, JensenVerdict,
                      JointPmf, MixtureWitness, check_concavity,
                      check_dirac_vanishing, check_doa_from_joint,
                      check_jensen, recompute_margin)
from .loss_repr import (GapReport, LossRepresentation, SimplexFunctional,
                        build_loss_representation, extended_dot,
                        min_affine_value, phi_simplex_functional,
                        representation_gap, supporting_vector)
from .measures import (Atomic, Atomless, Category, DiracPushforward,
                       DiscreteMeasure, FiniteMixture, MeasureRepr, Mixed,
                       Outcome, RandomMeasure, SymmetrizedDiracPair,
                       TailedMeasureN, TailedN, as_outcome, dirac,
                       empirical_measure, intensity, measure_from_json,
                       measure_to_json, merge_atoms, mix, sample_realization)
from .quadratic import (AbsDiff, CndReport, Discrete01, EmbeddingKernel,
                        FractionalPower, IntegratedVarianceGrid, KernelSpec,
                        PowerUnrestricted, SquaredHalf, UserTable,
                        ZeroMassReport, cnd_certify, cnd_quadratic_form,
                        induced_kernel, kernel_from_json,
                        quf_jensen_difference, quf_value, quf_value_samples,
                        zero_mass_energy)
from .registry import functional_from_spec
from .sensitivity import (Column, Dataset, IndexEntry, SensitivityAnalyzer,
                          SensitivityReport, sensitivity_exact_discrete,
                          sensitivity_from_samples, sobol_variance_shortcut)
