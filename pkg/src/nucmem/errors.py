"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class UnsupportedConstructionError(InvalidArgumentError):
    """The requested construction is undefined for these inputs."""


class ResourceCapError(RuntimeError):
    """A computation would exceed a configured resource cap."""

    def __init__(self, message, requested=None, cap=None):
        super().__init__(message)
        self.requested = requested
        self.cap = cap


class SubspaceViolationError(ValueError):
    """An operator expression maps a basis state outside the basis."""


class DegenerateStateError(RuntimeError):
    """A construction produced a zero vector or a zero energy gap."""


class ToleranceError(RuntimeError):
    """A numerical procedure cannot reach the requested tolerance."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class ProfileGenerationError(RuntimeError):
    """Random coupling generation failed to produce positive values."""
