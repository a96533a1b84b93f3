"""Exception types shared across the package."""


class ResourceError(RuntimeError):
    """Requested computation exceeds a configured size/memory cap."""


class ConsistencyError(RuntimeError):
    """A numerical result violates an invariant beyond tolerance."""


class FitError(RuntimeError):
    """Exponential-sum fit failed to converge; carries the best residual found."""

    def __init__(self, message, sup_residual=None):
        super().__init__(message)
        self.sup_residual = sup_residual
