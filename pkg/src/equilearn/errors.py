"""Exception and warning types raised across the package."""


class InvalidLatticeError(ValueError):
    """Lattice too small or otherwise malformed."""


class DimensionError(ValueError):
    """Vector or operator does not match the expected layout."""


class ResourceLimitError(ValueError):
    """Request exceeds a configured size cap."""


class InvalidObservableError(ValueError):
    pass


class InvalidExponentError(ValueError):
    pass


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(RuntimeError):
    """Iterative solver stopped before reaching its tolerance.

    ``diagnostic`` carries the best residual (eigensolver) or the final
    duality gap (LASSO).
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic


class FitError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


class SweepError(RuntimeError):
    pass


class DegeneracyWarning(UserWarning):
    """Ground state is (nearly) degenerate, so rho(x) is ill-defined."""
