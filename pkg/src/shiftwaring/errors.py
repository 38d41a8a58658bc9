"""Exception types shared across the package."""


class ShiftWaringError(Exception):
    """Base class for package errors."""


class ConfigError(ShiftWaringError):
    """Invalid parameter or malformed experiment configuration."""


class BudgetExceededError(ShiftWaringError):
    """An enumeration or table would exceed the tuple/memory budget."""


class MeshTooCoarseError(ShiftWaringError):
    """Quadrature mesh violates the phase-resolution guidance."""


class NonConvergenceError(ShiftWaringError):
    """Adaptive quadrature exhausted its node budget."""


class HypothesisViolationError(ShiftWaringError):
    """A rational approximation does not satisfy the stated hypothesis."""


class TransformUnavailableError(ShiftWaringError):
    """No closed-form transform exists for the requested kernel kind."""
