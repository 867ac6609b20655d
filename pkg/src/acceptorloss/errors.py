"""Exception and warning types raised across the toolkit."""


class AcceptorLossError(Exception):
    """Base class for toolkit errors."""


class ValidationError(AcceptorLossError, ValueError):
    """Input outside an operation's domain."""


class NumericalError(AcceptorLossError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class DegenerateSteadyState(NumericalError):
    def __init__(self, dimension):
        super().__init__(
            f"Liouvillian null space has dimension {dimension}; the steady state "
            "is not unique (pass an initial state to select one)"
        )
        self.dimension = dimension


class ZeroTemperatureSaturation(ValidationError):
    """In-field critical Rabi frequency vanishes identically at nbar = 0."""


class StepFailure(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class FitDiverged(NumericalError):
    pass


class InsufficientSpan(ValidationError):
    pass


class SchemaError(ValidationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonMonotonicFrequency(SchemaError):
    pass


class NegativeWeight(SchemaError):
    pass


class InvalidStrainCell(ValidationError):
    def __init__(self, indices):
        super().__init__(f"non-finite strain in cells {list(indices)}")
        self.indices = list(indices)


class ApproximationInvalid(UserWarning):
    """The secular approximation behind an analytic formula is not justified."""


class RegimeViolation(UserWarning):
    """Log-log data show curvature, so n >> n_c does not hold."""
