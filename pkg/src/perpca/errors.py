"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class InvariantError(ValueError):
    """A structural contract (orthonormality, cross-orthogonality, ...) is violated."""


class SingularityError(RuntimeError):
    """A matrix that must have full column rank does not."""
