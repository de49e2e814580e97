"""Exception hierarchy shared by all modules."""


class BallBeamError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(BallBeamError, ValueError):
    """Coefficient vectors or operators of incompatible length."""


class DomainError(BallBeamError, ValueError):
    """Argument outside the domain of a function (e.g. y <= 0, s < 0)."""


class ConfigError(BallBeamError, ValueError):
    """Invalid configuration; the message names the violated invariant."""


class StepSizeError(ConfigError):
    """Time step violates 1 - tau*a > 0 or 1 - tau*||N|| > 0."""


class NumericalError(BallBeamError, ArithmeticError):
    """A non-finite value appeared during a run."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NonConvergence(BallBeamError, RuntimeError):
    """The per-step fixed-point iteration hit ``max_iter``."""

    def __init__(self, step, residual, iterations):
        super().__init__(
            f"fixed-point iteration did not converge at step {step} "
            f"after {iterations} iterations (last increment {residual:.3e})"
        )
        self.step = step
        self.residual = residual
        self.iterations = iterations
