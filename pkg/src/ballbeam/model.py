"""The continuous model: operators, nonlinearities and the constants a1, a2."""
from dataclasses import dataclass

from .errors import ConfigError
from .nonlinearity import NonlinearityTriple, ball_triple
from .operators import OperatorSet, SineSpace, beam_operators


@dataclass(frozen=True)
class Model:
    """u'' + a1 B u' + a2 B u + psi1 A u + (psi2)' A u + psi3 u + C u + N u' + M(u) = f."""

    space: SineSpace
    ops: OperatorSet
    triple: NonlinearityTriple
    a1: float
    a2: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ConfigError("a1 and a2 must be positive")
        if self.ops.modes != self.space.modes:
            raise ConfigError("operator mode count differs from the space")

    @property
    def a_ratio(self):
        return self.a2 / self.a1

    @property
    def kernel_eligible(self):
        """Diagonal C and N, no M, polynomial psi's: the compiled run applies."""
        return self.ops.diagonal and self.triple.all_polynomial

    def gamma(self, u):
        """||A^(1/2) u||^2."""
        return self.space.weight * float((self.ops.A.eigenvalues * u) @ u)

    def theta(self, u):
        """||u||^2."""
        return self.space.weight * float(u @ u)

    def beta(self, u):
        """||B^(1/2) u||^2."""
        return self.space.weight * float((self.ops.B.eigenvalues * u) @ u)

    def norm_Bhalf(self, u):
        return self.beta(u) ** 0.5


@dataclass(frozen=True)
class BallParameters:
    a1: float = 0.5
    a2: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.5
    delta: float = 0.1


def ball_model(space, params=BallParameters(), c_scale=0.0):
    """Ball's damped extensible beam on (0, l) with hinged ends."""
    ops = beam_operators(space, c_scale=c_scale, delta=params.delta)
    return Model(space, ops, ball_triple(params.alpha, params.beta, params.gamma), params.a1, params.a2)
