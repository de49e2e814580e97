"""Sine-basis representation of L2(0, l) and diagonal operator algebra.

A state is a plain float64 array ``c`` of length J holding the coefficients of
``sum_j c_j sin(j pi x / l)``. Operators that are diagonal in this basis are
stored by their eigenvalues. The L2(0, l) inner product of two expansions is
``(l/2) * sum_j c_j d_j``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DimensionError, NumericalError


def as_state(u, modes=None, name="state"):
    """Validate ``u`` as a finite 1-D coefficient vector and return a float array."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if modes is not None and arr.shape[0] != modes:
        raise DimensionError(f"{name} has {arr.shape[0]} modes, expected {modes}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite entries")
    return arr


def _check_same_length(*arrays):
    n = arrays[0].shape[-1]
    for a in arrays[1:]:
        if a.shape[-1] != n:
            raise DimensionError(f"length mismatch: {n} vs {a.shape[-1]}")


@dataclass(frozen=True)
class SpectralOperator:
    """Positive operator, diagonal in the sine basis."""

    eigenvalues: np.ndarray
    label: str = ""

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise DimensionError("eigenvalues must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
            raise ConfigError(f"operator {self.label or '?'} must have finite eigenvalues > 0")
        lam = lam.copy()
        lam.flags.writeable = False
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def modes(self):
        return self.eigenvalues.shape[0]

    def apply(self, u):
        u = np.asarray(u, dtype=float)
        _check_same_length(self.eigenvalues, u)
        return self.eigenvalues * u

    def solve(self, u):
        """Apply the inverse operator."""
        u = np.asarray(u, dtype=float)
        _check_same_length(self.eigenvalues, u)
        return u / self.eigenvalues

    def power(self, s):
        if s == 0:
            lam = np.ones_like(self.eigenvalues)
        else:
            lam = self.eigenvalues ** float(s)
        return SpectralOperator(lam, label=f"{self.label}^{s:g}")

    def __len__(self):
        return self.modes


def apply(op, u):
    return op.apply(u)


def power(op, s):
    return op.power(s)


@dataclass(frozen=True)
class SineSpace:
    """L2(0, length) truncated to the first ``modes`` sine modes."""

    length: float = np.pi
    modes: int = 8

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError("interval length must be positive")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ConfigError("mode count must be a positive integer")

    @property
    def weight(self):
        return 0.5 * self.length

    @property
    def wavenumbers(self):
        return np.arange(1, self.modes + 1) * np.pi / self.length

    def laplacian(self):
        """-d^2/dx^2 with hinged ends: eigenvalues (j pi / l)^2."""
        return SpectralOperator(self.wavenumbers ** 2, label="A")

    def bilaplacian(self):
        """d^4/dx^4 with hinged ends, equal to the square of ``laplacian()``."""
        return SpectralOperator(self.wavenumbers ** 4, label="B")

    def zeros(self):
        return np.zeros(self.modes)

    def basis(self, j):
        """Coefficient vector of sin(j pi x / l), j counted from 1."""
        if not 1 <= j <= self.modes:
            raise DimensionError(f"mode {j} outside 1..{self.modes}")
        e = np.zeros(self.modes)
        e[j - 1] = 1.0
        return e

    def inner(self, u, v):
        return inner(u, v, self.length)

    def norm(self, u, op=None, s=1.0):
        return norm_of(u, op, s, self.length)

    def evaluate(self, u, x):
        """Point values of the expansion at positions ``x``."""
        x = np.asarray(x, dtype=float)
        u = as_state(u, self.modes)
        return np.sin(np.multiply.outer(x, self.wavenumbers)) @ u


def inner(u, v, length=np.pi):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_same_length(u, v)
    return 0.5 * length * float(np.dot(u, v))


def norm_of(u, op=None, s=1.0, length=np.pi):
    """``||op^s u||``; ``op=None`` means the identity."""
    u = np.asarray(u, dtype=float)
    if op is None or s == 0:
        w = u
    else:
        lam = op.eigenvalues
        _check_same_length(lam, u)
        w = lam ** float(s) * u
    return float(np.sqrt(0.5 * length * np.dot(w, w)))


# Bounded linear maps C and N are either a diagonal (1-D array) or a dense
# J x J matrix acting on coefficient vectors.

def apply_linear(m, u):
    if m.ndim == 1:
        return m * u
    return m @ u


def linear_norm(m):
    if m.ndim == 1:
        return float(np.max(np.abs(m))) if m.size else 0.0
    # Parseval weight cancels: the sine basis is orthogonal with equal weights.
    return float(np.linalg.norm(m, 2))


def _as_linear(m, modes, name):
    if m is None:
        return np.zeros(modes)
    if np.isscalar(m):
        return np.full(modes, float(m))
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == modes:
        return arr
    if arr.ndim == 2 and arr.shape == (modes, modes):
        return arr
    raise DimensionError(f"{name} must be a scalar, a length-{modes} diagonal or a {modes}x{modes} matrix")


@dataclass(frozen=True)
class OperatorSet:
    """A, B plus the lower-order maps C (linear), N (bounded linear), M (Lipschitz).

    ``C`` and ``N`` accept a scalar (times identity), a diagonal or a dense
    matrix. ``C`` defaults to ``c_scale * A`` and ``N`` to ``delta * I``.
    """

    A: SpectralOperator
    B: SpectralOperator
    C: Optional[np.ndarray] = None
    N: Optional[np.ndarray] = None
    M: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz_M: float = 0.0
    b0: float = 1.0
    a0: float = 1.0
    c_scale: float = field(default=0.0, repr=False)
    delta: float = field(default=0.0, repr=False)

    def __post_init__(self):
        J = self.A.modes
        if self.B.modes != J:
            raise DimensionError("A and B must have the same number of modes")
        C = self.C
        if C is None:
            C = self.c_scale * self.A.eigenvalues
        object.__setattr__(self, "C", _as_linear(C, J, "C"))
        N = self.N
        if N is None:
            N = self.delta
        object.__setattr__(self, "N", _as_linear(N, J, "N"))
        lamA, lamB = self.A.eigenvalues, self.B.eigenvalues
        # ||A u||^2 <= b0^2 (B u, u), checked per mode
        if np.any(lamA ** 2 > self.b0 ** 2 * lamB * (1.0 + 1e-12)):
            raise ConfigError("compatibility ||A u||^2 <= b0^2 (B u, u) fails for some mode")
        # ||C e_j|| <= a0 ||A e_j||
        col = np.abs(self.C) if self.C.ndim == 1 else np.linalg.norm(self.C, axis=0)
        if np.any(col > self.a0 * lamA * (1.0 + 1e-12)):
            raise ConfigError("bound ||C u|| <= a0 ||A u|| fails for some basis vector")
        if self.lipschitz_M < 0:
            raise ConfigError("Lipschitz constant of M must be non-negative")

    @property
    def modes(self):
        return self.A.modes

    @property
    def norm_N(self):
        return linear_norm(self.N)

    @property
    def diagonal(self):
        """True when C and N are diagonal and M is absent."""
        return self.C.ndim == 1 and self.N.ndim == 1 and self.M is None

    def apply_C(self, u):
        return apply_linear(self.C, u)

    def apply_N(self, u):
        return apply_linear(self.N, u)

    def apply_M(self, u):
        if self.M is None:
            return np.zeros_like(u)
        return np.asarray(self.M(u), dtype=float)

    def is_conservative(self):
        """C = 0, N = 0 and M = 0, the setting of the unforced energy identity."""
        return not np.any(self.C) and not np.any(self.N) and self.M is None


def beam_operators(space, c_scale=0.0, delta=0.0, b0=1.0, a0=1.0):
    """Hinged beam: A = -d2/dx2, B = A^2, C = c_scale*A, N = delta*I."""
    return OperatorSet(
        A=space.laplacian(),
        B=space.bilaplacian(),
        c_scale=c_scale,
        delta=delta,
        b0=b0,
        a0=a0,
    )
