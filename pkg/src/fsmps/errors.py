"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An input violates a numerical precondition (e.g. not Hermitian)."""


class DegeneratePolarError(ValueError):
    """Polar decomposition requested for a rank-deficient matrix."""


class BranchDomainError(ValueError):
    """Coordinates left the principal branch of the exponential chart."""


class NonInvertibleSeriesError(ValueError):
    """Power series with vanishing linear coefficient cannot be inverted."""


class ResourceLimitError(RuntimeError):
    """Dense (desk-scale) operation requested beyond the configured guard."""


class InsufficientDataError(ValueError):
    """Not enough samples for the requested diagnostic."""
