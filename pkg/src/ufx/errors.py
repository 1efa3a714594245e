"""Exception hierarchy.

Two top-level families matter for the CLI exit codes: ``ValidationError``
(bad inputs, exit 1) and ``ComputationError`` (a well-formed request that
cannot be computed, exit 2).
"""


class UfxError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(UfxError, ValueError):
    """Invalid input data or violated construction invariant."""


class DomainError(ValidationError):
    """An outcome lies outside the domain of the requested functional."""


class PreconditionError(ValidationError):
    """A documented precondition of an operation does not hold."""


class ComputationError(UfxError):
    """The request is well-formed but cannot be evaluated."""


class CapabilityError(ComputationError):
    """A functional was asked to evaluate a representation it does not support."""


class UnsupportedRepresentationError(ComputationError):
    """The requested combination of measure representations is not materializable."""


class EstimatorError(ComputationError):
    """The requested estimator is not applicable to the given measure."""


class DegenerateOutputError(ComputationError):
    """Total uncertainty is (numerically) zero; normalized indices are undefined."""


class BinningError(ComputationError):
    """A conditioning bin is too small for the requested estimator."""


class SelfCheckError(ComputationError):
    """An internal mathematical identity failed its numerical self-check."""
