"""Nonlinear coefficient functions psi_1, psi_2, psi_3 and the scheme coefficients.

Each psi is either a polynomial (exact integral means) or a callable evaluated
with a fixed 16-node Gauss-Legendre rule.
"""
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError

QUAD_ORDER = 16
DEGENERATE_REL = 1e-8

# Same arithmetic as the compiled kernel, run as plain Python.
_poly_eval = getattr(_kernels.poly_eval, "py_func", _kernels.poly_eval)
_poly_mean = getattr(_kernels.poly_mean, "py_func", _kernels.poly_mean)


@dataclass(frozen=True)
class Psi:
    """A nonnegative function on [0, inf).

    Build with :meth:`polynomial` or :meth:`from_callable`; do not fill the
    fields by hand.
    """

    coeffs: Optional[np.ndarray] = None
    func: Optional[Callable[[float], float]] = None
    deriv: Optional[Callable[[float], float]] = None
    quad_order: int = QUAD_ORDER
    name: str = "psi"

    @classmethod
    def polynomial(cls, coeffs, name="psi"):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
            raise ConfigError(f"{name}: polynomial coefficients must be a non-empty finite list")
        c = c.copy()
        c.flags.writeable = False
        return cls(coeffs=c, name=name)

    @classmethod
    def constant(cls, value, name="psi"):
        return cls.polynomial([value], name=name)

    @classmethod
    def from_callable(cls, func, derivative=None, quad_order=QUAD_ORDER, name="psi"):
        return cls(func=func, deriv=derivative, quad_order=quad_order, name=name)

    @property
    def is_polynomial(self):
        return self.coeffs is not None

    @property
    def is_zero(self):
        return self.is_polynomial and not np.any(self.coeffs)

    def __call__(self, s):
        if self.is_polynomial:
            return _poly_eval(self.coeffs, float(s))
        return float(self.func(float(s)))

    def derivative(self, s):
        if self.is_polynomial:
            c = self.coeffs
            if c.size == 1:
                return 0.0
            return _poly_eval(c[1:] * np.arange(1, c.size), float(s))
        if self.deriv is None:
            raise ConfigError(f"{self.name}: derivative not supplied for callable")
        return float(self.deriv(float(s)))

    def antiderivative(self, s):
        """int_0^s psi."""
        s = float(s)
        if self.is_polynomial:
            c = self.coeffs
            return s * _poly_eval(c / np.arange(1, c.size + 1), s)
        if s == 0.0:
            return 0.0
        return s * self._gauss_mean(0.0, s)

    def _gauss_mean(self, a, b):
        x, w = np.polynomial.legendre.leggauss(self.quad_order)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        vals = np.array([self.func(mid + half * xi) for xi in x], dtype=float)
        return 0.5 * float(np.dot(w, vals))

    def mean(self, a, b):
        return integral_mean(self, a, b)

    def check(self, s_max, increasing=False, samples=257):
        """Sample nonnegativity (and monotonicity) on [0, s_max].

        Violations raise for polynomials and warn for callables.
        """
        s = np.linspace(0.0, max(float(s_max), 1e-12), samples)
        vals = np.array([self(si) for si in s])
        problems = []
        if np.any(vals < -1e-14 * max(1.0, np.max(np.abs(vals)))):
            problems.append("negative values")
        if increasing and np.any(np.diff(vals) < -1e-14 * max(1.0, np.max(np.abs(vals)))):
            problems.append("not non-decreasing")
        if problems:
            msg = f"{self.name}: {', '.join(problems)} on [0, {s_max:g}]"
            if self.is_polynomial:
                raise ConfigError(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return not problems


def integral_mean(psi, a, b):
    """(1/(b-a)) int_a^b psi(s) ds, symmetric in (a, b); psi((a+b)/2) when a == b."""
    a = float(a)
    b = float(b)
    if a < 0 or b < 0:
        raise DomainError("integral mean arguments must be non-negative")
    if psi.is_polynomial:
        return _poly_mean(psi.coeffs, a, b)
    lo, hi = (a, b) if a <= b else (b, a)
    if hi - lo <= DEGENERATE_REL * max(1.0, lo + hi):
        return psi(0.5 * (lo + hi))
    return psi._gauss_mean(lo, hi)


@dataclass(frozen=True)
class NonlinearityTriple:
    psi1: Psi
    psi2: Psi
    psi3: Psi

    def __post_init__(self):
        # unnamed members take their slot name so messages say which psi failed
        for slot in ("psi1", "psi2", "psi3"):
            psi = getattr(self, slot)
            if psi.name == "psi":
                object.__setattr__(self, slot, replace(psi, name=slot))

    @property
    def all_polynomial(self):
        return self.psi1.is_polynomial and self.psi2.is_polynomial and self.psi3.is_polynomial

    @property
    def is_zero(self):
        return self.psi1.is_zero and self.psi2.is_zero and self.psi3.is_zero

    def check(self, s_max):
        ok = self.psi1.check(s_max)
        ok &= self.psi2.check(s_max, increasing=True)
        ok &= self.psi3.check(s_max)
        return ok


def ball_triple(alpha, beta, gamma):
    """psi1 = alpha + beta s, psi2 = gamma s, psi3 = 0."""
    return NonlinearityTriple(
        Psi.polynomial([alpha, beta], name="psi1"),
        Psi.polynomial([0.0, gamma], name="psi2"),
        Psi.polynomial([0.0], name="psi3"),
    )


def zero_triple():
    z = Psi.polynomial([0.0])
    return NonlinearityTriple(z, z, z)


def coeff_a1(triple, gamma_prev, gamma_next):
    return integral_mean(triple.psi1, gamma_prev, gamma_next)


def coeff_d(triple, gamma_prev, gamma_next, tau):
    if not tau > 0:
        raise ConfigError("time step tau must be positive")
    return (triple.psi2(gamma_next) - triple.psi2(gamma_prev)) / (2.0 * tau)


def coeff_a3(triple, theta_prev, theta_next):
    return integral_mean(triple.psi3, theta_prev, theta_next)
