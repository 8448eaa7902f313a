"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A constructor or operation precondition was violated."""


class AnalysisUnsupportedError(RuntimeError):
    """Exact analysis requested on a system that only supports simulation."""


class ResourceLimitError(RuntimeError):
    """A configured state/path cap would be exceeded; raised before allocation."""


class InconsistentObservationError(ValueError):
    """An observed output sequence cannot be produced by the claimed system/seed."""


class NumericError(ArithmeticError):
    """An iterative numeric routine failed to reach its required residual."""


class IndeterminateError(NumericError):
    """A classification sits within numeric tolerance of its decision boundary."""
