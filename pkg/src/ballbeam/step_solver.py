"""Per-step implicit solve for v_{k+1} = (u_{k+1} + u_{k-1}) / 2.

One time step of the nonlinear scheme is rewritten as

    T_k v - (tau/2) psi2(gamma_{k-1}) A v + tau N v = ftil_k,
    T_k = (2 + tau^2 a3k) I + tau (a1 + tau a2) B + tau b_k A,
    b_k = tau a1k + psi2(gamma_{k+1}) / 2,

where a1k, a3k and gamma_{k+1} depend on u_{k+1} = 2v - u_{k-1}. The fixed
point iteration freezes T at the previous iterate and keeps the psi2(gamma_{k-1})
and N terms on the right. T only involves I, A and B, so every iteration is a
per-mode division even when N is a dense matrix.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import NOISE_FLOOR
from .errors import ConfigError, NonConvergence, NumericalError
from .nonlinearity import coeff_a1, coeff_a3
from .operators import apply_linear


@dataclass(frozen=True)
class IterationConfig:
    tol: float = 1e-12
    max_iter: int = 100
    q_max: float = 0.9

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError("solver.tol must be > 0")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError("solver.max_iter must be an integer >= 1")
        if not 0.0 < self.q_max < 1.0:
            raise ConfigError("solver.q_max must lie in (0, 1)")


@dataclass(frozen=True)
class StepOperators:
    """Everything about step k that does not depend on the iterate."""

    model: object
    tau: float
    u_prev: np.ndarray
    u_curr: np.ndarray
    gamma_prev: float
    theta_prev: float
    psi2_prev: float
    ftil: np.ndarray

    def unknowns(self, v):
        """(u_{k+1}, gamma_{k+1}, theta_{k+1}) for the iterate ``v``."""
        u_next = 2.0 * v - self.u_prev
        return u_next, self.model.gamma(u_next), self.model.theta(u_next)

    def diagonal(self, gamma, theta):
        """Eigenvalues of T for given gamma_{k+1}, theta_{k+1}."""
        m, tau = self.model, self.tau
        tri = m.triple
        a1k = coeff_a1(tri, self.gamma_prev, gamma)
        a3k = coeff_a3(tri, self.theta_prev, theta)
        b = tau * a1k + 0.5 * tri.psi2(gamma)
        lamA, lamB = m.ops.A.eigenvalues, m.ops.B.eigenvalues
        return (2.0 + tau * tau * a3k) + tau * (m.a1 + tau * m.a2) * lamB + tau * b * lamA

    def explicit(self, v):
        """(tau/2) psi2(gamma_{k-1}) A v - tau N v."""
        m = self.model
        return 0.5 * self.tau * self.psi2_prev * m.ops.A.eigenvalues * v - self.tau * apply_linear(m.ops.N, v)


def assemble(model, tau, u_prev, u_curr, f_k):
    """Build :class:`StepOperators` for the step u_{k-1}, u_k -> u_{k+1}."""
    ops = model.ops
    u_prev = np.asarray(u_prev, dtype=float)
    u_curr = np.asarray(u_curr, dtype=float)
    f_k = np.asarray(f_k, dtype=float)
    gtil = tau * f_k - tau * ops.apply_M(u_curr) + ops.apply_N(u_prev) - tau * ops.apply_C(u_curr)
    ftil = tau * gtil + tau * model.a1 * ops.B.eigenvalues * u_prev + 2.0 * u_curr
    gp = model.gamma(u_prev)
    return StepOperators(model, float(tau), u_prev, u_curr, gp, model.theta(u_prev),
                         model.triple.psi2(gp), ftil)


def iterate_once(step, v):
    """One fixed-point update v^(m) -> v^(m+1)."""
    _, g, th = step.unknowns(v)
    T = step.diagonal(g, th)
    if not np.all(T >= 2.0):
        raise NumericalError("assembled T has a mode below 2")
    return (step.explicit(v) + step.ftil) / T


def _bnorm(model, w):
    return math.sqrt(model.beta(w))


@dataclass
class StepResult:
    u_next: np.ndarray
    v: np.ndarray
    iterations: int
    contraction: float
    increment: float
    warning: bool = False


def solve_step(model, tau, u_prev, u_curr, f_k, config=IterationConfig(), step=None):
    """Iterate from v^(0) = (u_k + u_{k-1})/2 until the B^(1/2) increment is small.

    The contraction estimate is the largest ratio of successive increments,
    taken only while the older increment is above the round-off floor.
    """
    so = assemble(model, tau, u_prev, u_curr, f_k)
    v = 0.5 * (so.u_curr + so.u_prev)
    prev_diff, prev_ref, q = -1.0, 0.0, 0.0
    diff = 0.0
    for m in range(1, config.max_iter + 1):
        vnew = iterate_once(so, v)
        diff = _bnorm(model, vnew - v)
        ref = _bnorm(model, v)
        if not math.isfinite(diff):
            raise NumericalError(f"non-finite iterate at step {step}", step)
        if prev_diff > NOISE_FLOOR * (1.0 + prev_ref):
            q = max(q, diff / prev_diff)
        prev_diff, prev_ref = diff, ref
        v = vnew
        if diff <= config.tol * (1.0 + ref):
            return StepResult(2.0 * v - so.u_prev, v, m, q, diff, q > config.q_max)
    raise NonConvergence(step, diff, config.max_iter)


def step_residual(step, v):
    """Residual of the implicit relation at ``v``, as a coefficient vector."""
    _, g, th = step.unknowns(v)
    return step.diagonal(g, th) * v - step.explicit(v) - step.ftil


def residual_norm(step, v):
    """``||B^(1/2) r(v)||`` for the residual of :func:`step_residual`."""
    return _bnorm(step.model, step_residual(step, v))


# --------------------------------------------------------------------------
# Independent oracle: scalar root finding in gamma (and theta)


def _linear_solve(step, gamma, theta):
    """v with (T(gamma, theta) - (tau/2) psi2_prev A + tau N) v = ftil."""
    m, tau = step.model, step.tau
    d = step.diagonal(gamma, theta) - 0.5 * tau * step.psi2_prev * m.ops.A.eigenvalues
    N = m.ops.N
    if N.ndim == 1:
        return step.ftil / (d + tau * N)
    return np.linalg.solve(np.diag(d) + tau * N, step.ftil)


def _bracket_root(h, x0=0.0, scale=1.0):
    """Sign change of ``h`` on [x0, x1] by doubling; h(x0) >= 0 is assumed."""
    lo, hlo = x0, h(x0)
    if hlo == 0.0:
        return lo, lo
    width = max(scale, 1e-300)
    for _ in range(2000):
        hi = x0 + width
        hhi = h(hi)
        if hhi <= 0.0:
            return lo, hi
        lo = hi
        width *= 2.0
    raise RuntimeError("oracle could not bracket the root")


def oracle_solve_step(model, tau, u_prev, u_curr, f_k, xtol=1e-15):
    """Solve the implicit relation exactly in the scalar unknowns.

    For fixed (gamma, theta) the relation is linear in v. gamma_{k+1} is then
    the root of ``gamma(2 v(gamma) - u_prev) - gamma``, found by bracketing
    and Brent's method; when psi3 is not zero a nested root fixes theta. Meant
    for tests on small problems only.
    """
    from scipy.optimize import brentq

    step = assemble(model, tau, u_prev, u_curr, f_k)
    need_theta = not model.triple.psi3.is_zero

    def v_of(gamma):
        if not need_theta:
            return _linear_solve(step, gamma, 0.0)

        def h_theta(theta):
            return model.theta(2.0 * _linear_solve(step, gamma, theta) - step.u_prev) - theta

        lo, hi = _bracket_root(h_theta, scale=1.0 + model.theta(step.u_curr))
        theta = lo if lo == hi else brentq(h_theta, lo, hi, xtol=xtol * (1.0 + hi), rtol=1e-15)
        return _linear_solve(step, gamma, theta)

    def h_gamma(gamma):
        return model.gamma(2.0 * v_of(gamma) - step.u_prev) - gamma

    if model.triple.psi1.is_zero and model.triple.psi2.is_zero and not need_theta:
        v = _linear_solve(step, 0.0, 0.0)
    else:
        lo, hi = _bracket_root(h_gamma, scale=1.0 + model.gamma(step.u_curr))
        gamma = lo if lo == hi else brentq(h_gamma, lo, hi, xtol=xtol * (1.0 + hi), rtol=1e-15)
        v = v_of(gamma)
    return v, step
