"""Exception types raised across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class ResonanceError(ArithmeticError):
    """A Fourier mode or grid frequency sits on the resonance |k| = omega_tilde."""


class PoleError(ArithmeticError):
    """A transmission parameter hits a pole of the convergence factor."""


class OptimizationError(RuntimeError):
    """The min-max optimizer ran out of budget; carries the best point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DivergenceError(RuntimeError):
    """A Schwarz iteration grew instead of contracting."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GMRESBreakdown(RuntimeError):
    pass


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class SchemaError(ValueError):
    """A results file was written with a different schema version."""
