"""The three-layer nonlinear scheme: start-up, time loop and energy diagnostics."""
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels
from ._accel import numba_enabled
from .errors import ConfigError, NonConvergence, NumericalError, StepSizeError
from .operators import as_state
from .step_solver import IterationConfig, solve_step

TRACE_COLUMNS = ("step", "t", "norm_u", "norm_Asqrt_u", "norm_Bsqrt_u",
                 "norm_du_dt", "lambda", "iters", "contraction")
ENERGY_TOL = 1e-10


@dataclass(frozen=True)
class SchemeConfig:
    """A discrete problem: model, horizon ``t_end`` split in ``n`` steps, data.

    ``forcing`` maps t to a coefficient vector, ``None`` means f = 0.
    ``start="first"`` replaces the Taylor start by u_1 = phi0 + tau phi1.
    """

    model: object
    t_end: float
    n: int
    phi0: np.ndarray
    phi1: np.ndarray
    forcing: Optional[Callable[[float], np.ndarray]] = None
    iteration: IterationConfig = field(default_factory=IterationConfig)
    start: str = "second"

    def __post_init__(self):
        J = self.model.space.modes
        object.__setattr__(self, "phi0", as_state(self.phi0, J, "phi0"))
        object.__setattr__(self, "phi1", as_state(self.phi1, J, "phi1"))
        self.validate()

    @property
    def tau(self):
        return self.t_end / self.n

    def validate(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigError("time.t_end must be a positive finite number")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError("time.n must be an integer >= 2")
        if self.start not in ("second", "first"):
            raise ConfigError("time.start must be 'second' or 'first'")
        tau = self.tau
        nN = self.model.ops.norm_N
        if not 1.0 - tau * nN > 0:
            raise StepSizeError(f"1 - tau*||N|| > 0 violated (tau*||N|| = {tau * nN:g})")
        ta = tau * self.model.a_ratio
        if not 1.0 - ta > 0:
            raise StepSizeError(f"1 - tau*a > 0 violated (tau*a2/a1 = {ta:g})")

    def with_steps(self, n):
        return replace(self, n=int(n))

    def forcing_at(self, t):
        J = self.model.space.modes
        if self.forcing is None:
            return np.zeros(J)
        return as_state(self.forcing(t), J, "forcing")

    def forcing_rows(self):
        """Array with row k = f(t_k), k = 0..n."""
        J = self.model.space.modes
        F = np.zeros((self.n + 1, J))
        if self.forcing is not None:
            for k in range(self.n + 1):
                F[k] = self.forcing_at(k * self.tau)
        return F

    @property
    def unforced(self):
        return self.forcing is None


def compute_phi2(config):
    """u''(0) read off the equation at t = 0."""
    m = config.model
    ops, tri = m.ops, m.triple
    p0, p1 = config.phi0, config.phi1
    lamA, lamB = ops.A.eigenvalues, ops.B.eigenvalues
    g0 = m.gamma(p0)
    Ap0 = lamA * p0
    chain = 2.0 * tri.psi2.derivative(g0) * m.space.weight * float(Ap0 @ p1)
    return (config.forcing_at(0.0) - m.a1 * lamB * p1 - m.a2 * lamB * p0
            - tri.psi1(g0) * Ap0 - chain * Ap0 - tri.psi3(m.theta(p0)) * p0
            - ops.apply_C(p0) - ops.apply_N(p1) - ops.apply_M(p0))


def starting_vector(config):
    """u_1 = phi0 + tau phi1 + (tau^2/2) phi2, or phi0 + tau phi1 for the first-order start."""
    tau = config.tau
    u1 = config.phi0 + tau * config.phi1
    if config.start == "second":
        u1 = u1 + 0.5 * tau * tau * compute_phi2(config)
    return u1


# --------------------------------------------------------------------------


@dataclass
class RunTrace:
    """Scalar diagnostics for rows k = 1..n."""

    step: np.ndarray
    t: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    energy: np.ndarray
    iters: np.ndarray
    contraction: np.ndarray
    warnings: np.ndarray
    tau: float
    conservative: bool

    def rows(self):
        cols = (self.step, self.t, np.sqrt(self.theta), np.sqrt(self.gamma), np.sqrt(self.beta),
                np.sqrt(self.alpha), self.energy, self.iters, self.contraction)
        return list(zip(*cols))


@dataclass
class RunResult:
    config: SchemeConfig
    states: np.ndarray
    trace: RunTrace

    @property
    def final(self):
        return self.states[-1]


def build_trace(config, U, iters, contraction):
    m = config.model
    tri = m.triple
    tau = config.tau
    w = m.space.weight
    lamA, lamB = m.ops.A.eigenvalues, m.ops.B.eigenvalues
    gamma = w * np.einsum("ij,j,ij->i", U, lamA, U)
    theta = w * np.einsum("ij,ij->i", U, U)
    beta = w * np.einsum("ij,j,ij->i", U, lamB, U)
    dU = np.diff(U, axis=0) / tau
    alpha = w * np.einsum("ij,ij->i", dU, dU)
    mu = np.array([tri.psi1.antiderivative(g) for g in gamma])
    nu = np.array([tri.psi3.antiderivative(s) for s in theta])
    # energy with the a2 weight on the B-part
    lam = alpha + 0.5 * (m.a2 * (beta[1:] + beta[:-1]) + mu[1:] + mu[:-1] + nu[1:] + nu[:-1])
    n = U.shape[0] - 1
    k = np.arange(1, n + 1)
    contraction = np.asarray(contraction, dtype=float)[1:]
    conservative = config.unforced and m.ops.is_conservative()
    return RunTrace(k, k * tau, gamma[1:], theta[1:], alpha, beta[1:], mu[1:], nu[1:], lam,
                    np.asarray(iters, dtype=np.int64)[1:], contraction,
                    contraction > config.iteration.q_max, tau, conservative)


def _run_kernel(config, u0, u1, F):
    m = config.model
    tri = m.triple
    U, iters, contraction, status, k, resid = _kernels.nonlinear_run(
        m.ops.A.eigenvalues, m.ops.B.eigenvalues, m.ops.C, m.ops.N, m.space.weight,
        m.a1, m.a2, config.tau, tri.psi1.coeffs, tri.psi2.coeffs, tri.psi3.coeffs,
        F, u0, u1, config.iteration.tol, config.iteration.max_iter)
    if status == _kernels.NOT_CONVERGED:
        raise NonConvergence(int(k), float(resid), config.iteration.max_iter)
    if status == _kernels.NON_FINITE:
        raise NumericalError(f"non-finite iterate at step {int(k)}", int(k))
    if status == _kernels.NON_POSITIVE:
        raise NumericalError(f"assembled T has a mode below 2 at step {int(k)}", int(k))
    return U, iters, contraction


def _run_python(config, u0, u1, F):
    n, J = config.n, u0.shape[0]
    U = np.empty((n + 1, J))
    U[0], U[1] = u0, u1
    iters = np.zeros(n + 1, dtype=np.int64)
    contraction = np.zeros(n + 1)
    for k in range(1, n):
        r = solve_step(config.model, config.tau, U[k - 1], U[k], F[k], config.iteration, step=k)
        U[k + 1] = r.u_next
        iters[k + 1] = r.iterations
        contraction[k + 1] = r.contraction
    return U, iters, contraction


def run(config, backend=None):
    """Solve the scheme for u_0..u_n; ``backend`` forces "numba" or "numpy"."""
    u0 = config.phi0.copy()
    u1 = starting_vector(config)
    F = config.forcing_rows()
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(F))):
        raise NumericalError("non-finite starting vector or forcing", 1)
    use_kernel = config.model.kernel_eligible and (numba_enabled() if backend is None else backend == "numba")
    runner = _run_kernel if use_kernel else _run_python
    U, iters, contraction = runner(config, u0, u1, F)
    bad = ~np.all(np.isfinite(U), axis=1)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NumericalError(f"non-finite state at step {k}", k)
    trace = build_trace(config, U, iters, contraction)
    # the psi's must be admissible on the range the run actually visited
    config.model.triple.check(float(max(trace.gamma.max(), trace.theta.max(), 0.0)))
    return RunResult(config, U, trace)


# --------------------------------------------------------------------------
# Diagnostics


def energy(trace, k):
    """lambda_k for k = 1..n."""
    return float(trace.energy[k - 1])


def check_energy_decay(trace, tol=ENERGY_TOL):
    """lambda_{k+1} <= lambda_k + tol (1 + lambda_k) for an unforced conservative run."""
    if not trace.conservative:
        return {"applicable": False, "pass": None, "reason": "not applicable: forcing or C, N, M present"}
    lam = trace.energy
    excess = lam[1:] - lam[:-1] - tol * (1.0 + lam[:-1])
    worst = int(np.argmax(excess)) if excess.size else 0
    ok = bool(np.all(excess <= 0.0))
    rel = (lam[1:] - lam[:-1]) / (1.0 + lam[:-1]) if excess.size else np.zeros(0)
    return {
        "applicable": True,
        "pass": ok,
        "max_relative_increase": float(rel.max()) if rel.size else 0.0,
        "worst_step": int(trace.step[worst + 1]) if excess.size else 0,
        "lambda_first": float(lam[0]),
        "lambda_last": float(lam[-1]),
    }


@dataclass
class BoundednessReport:
    n: list
    sup_du: list
    sup_Bu: list
    sup_dgamma: list
    passed: bool
    tol: float = 0.1

    def to_dict(self):
        return {"n": self.n, "sup_du_dt": self.sup_du, "sup_Bsqrt_u": self.sup_Bu,
                "sup_dgamma_dt": self.sup_dgamma, "tol": self.tol, "pass": self.passed}


def _spread_ok(values, tol):
    v = np.asarray(values, dtype=float)
    if np.all(v == 0.0):
        return True
    return bool(v.min() > 0 and v.max() <= (1.0 + tol) * v.min())


def boundedness_study(config, n_list=None, tol=0.1, runner=None):
    """Suprema of ||(u_k - u_{k-1})/tau||, ||B^(1/2) u_k|| and |gamma_k - gamma_{k-1}|/tau per n.

    Passes when each of the first two suprema stays within a factor ``1 + tol``
    across the whole family, which includes finest <= (1 + tol) * coarsest.
    """
    if n_list is None:
        n0 = config.n
        n_list = [n0, 2 * n0, 4 * n0, 8 * n0]
    runner = runner or run
    sup_du, sup_Bu, sup_dg = [], [], []
    for n in n_list:
        res = runner(config.with_steps(n))
        tr = res.trace
        gam = np.concatenate([[config.model.gamma(res.states[0])], tr.gamma])
        sup_du.append(float(np.sqrt(tr.alpha.max())))
        sup_Bu.append(float(np.sqrt(max(config.model.beta(res.states[0]), tr.beta.max()))))
        sup_dg.append(float(np.max(np.abs(np.diff(gam))) / tr.tau))
    ok = _spread_ok(sup_du, tol) and _spread_ok(sup_Bu, tol)
    return BoundednessReport(list(map(int, n_list)), sup_du, sup_Bu, sup_dg, ok, tol)
