"""Exception hierarchy shared by all modules."""


class SimApproxError(Exception):
    """Base class for library errors."""


class InvalidArgument(SimApproxError, ValueError):
    pass


class DomainError(SimApproxError, ValueError):
    """A point lies outside the region where an evaluator is defined."""


class NotDivisible(SimApproxError, ArithmeticError):
    def __init__(self, message: str, remainder: float):
        super().__init__(message)
        self.remainder = remainder


class ConstructionFailure(SimApproxError, RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Unsupported(SimApproxError, NotImplementedError):
    pass


class ResourceError(SimApproxError, RuntimeError):
    pass


class DegreeError(SimApproxError, ValueError):
    """Degree bookkeeping violated (budget exceeded or cap reached)."""
