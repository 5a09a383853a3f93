"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class InfeasibleError(ValueError):
    """A construction or search cannot satisfy the requested constraints."""


class ProjectionError(RuntimeError):
    """Moment projection failed to converge or the target is unreachable."""
