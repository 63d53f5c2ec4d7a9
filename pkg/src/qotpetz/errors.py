"""Exception hierarchy shared by every module."""


class QOTError(Exception):
    """Base class for all errors raised by qotpetz."""


class DimensionError(QOTError, ValueError):
    """Operands have incompatible shapes."""


class DimensionLimitError(DimensionError):
    """A tensor product would exceed the configured maximum dimension."""


class ParameterError(QOTError, ValueError):
    pass


class NotHermitianError(QOTError, ValueError):
    pass


class NotPSDError(QOTError, ValueError):
    pass


class NotNormalizedError(QOTError, ValueError):
    pass


class NotTracePreservingError(QOTError, ValueError):
    pass


class NotAChannelError(QOTError, ValueError):
    """A Choi matrix whose input marginal is not the identity."""


class DomainError(QOTError, ValueError):
    """A channel is not defined on the support of the state it is paired with."""


class NotACouplingOfRhoError(QOTError, ValueError):
    pass


class ReconstructionError(QOTError):
    """A coupling lies outside the image of the channel correspondence."""


class NumericError(QOTError, ArithmeticError):
    pass


class NumericConsistencyError(NumericError):
    pass


class DegenerateOutputError(NumericError):
    pass


class SolverFailure(QOTError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class TheoremViolation(QOTError):
    """A verified identity failed beyond its tolerance."""
