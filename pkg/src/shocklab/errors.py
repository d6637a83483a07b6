"""Exception types shared across the package."""


class ShockLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ShockLabError):
    """Input lies outside the model's validity radius."""


class DegenerateInputError(ShockLabError):
    """Inputs make the requested quantity undefined (e.g. equal shock endpoints)."""


class PreconditionError(ShockLabError):
    """A documented precondition of an operation was violated."""


class SolverFailureError(ShockLabError):
    """A numerical solve did not produce a usable result."""


class BlowUpError(ShockLabError):
    """The evolved field became non-finite."""


class RadiusViolationError(ShockLabError):
    """The evolved field left the model's validity radius."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class MonotonicityError(ShockLabError):
    """Weighted relative entropy increased beyond the frozen per-step slack."""


class HypothesisError(ShockLabError):
    """A sampled test function violates the hypotheses of the inequality under test."""


class ConfigError(ShockLabError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
