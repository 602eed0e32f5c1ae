"""Exception types shared across the library."""


class EnsembleFeedbackError(Exception):
    """Base class for all library errors."""


class GridMismatchError(EnsembleFeedbackError):
    """Two sampled objects do not live on the same parameter grid."""


class DomainError(EnsembleFeedbackError):
    """An argument lies outside the domain an operation is defined on."""


class PreconditionError(EnsembleFeedbackError):
    """A documented precondition failed; carries the offending parameter value.

    ``theta`` is the witness parameter (or a pair of parameters) when one
    exists, ``detail`` an optional structured payload for reports.
    """

    def __init__(self, message, theta=None, detail=None):
        super().__init__(message)
        self.theta = theta
        self.detail = detail


class NumericalError(PreconditionError):
    """A matrix was numerically singular or ill-conditioned at some theta."""
