"""Three-layer semi-discrete scheme for the nonlinear Ball beam equation.

Time stepping in a sine-spectral basis, a two-variable Chebyshev polynomial
toolkit, a priori estimate checks for the linear scheme and verification
studies for the nonlinear one.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BallBeamError,
    ConfigError,
    DimensionError,
    DomainError,
    NonConvergence,
    NumericalError,
    StepSizeError,
)
from .model import BallParameters, Model, ball_model  # noqa: E402
from .nonlinear_scheme import SchemeConfig, run  # noqa: E402
from .operators import OperatorSet, SineSpace, SpectralOperator  # noqa: E402
from .step_solver import IterationConfig, solve_step  # noqa: E402

__all__ = [
    "__version__",
    "BallBeamError", "ConfigError", "DimensionError", "DomainError", "NonConvergence",
    "NumericalError", "StepSizeError",
    "BallParameters", "Model", "ball_model",
    "SchemeConfig", "run",
    "OperatorSet", "SineSpace", "SpectralOperator",
    "IterationConfig", "solve_step",
]
