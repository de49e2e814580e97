"""Linear three-layer scheme and its Chebyshev-polynomial representation.

The scheme

    (u_{k+1} - 2u_k + u_{k-1})/tau^2 + a1 B (u_{k+1} - u_{k-1})/(2 tau)
        + a2 B (u_{k+1} + u_{k-1})/2 = f_k

is written as ``B0 u_{k+1} - 2 u_k + B1 u_{k-1} = tau^2 f_k`` with
``B0 = I + (tau/2) a1 B + (tau^2/2) a2 B`` and ``B1 = B0 - tau a1 B``, or as
``u_{k+1} = L u_k - S u_{k-1} + (tau^2/2) L f_k`` with ``L = 2 B0^-1`` and
``S = B1 B0^-1``. All four operators are diagonal in the eigenbasis of B.
"""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._kernels import cheb_table, linear_steps
from .errors import DimensionError, StepSizeError
from .operators import SpectralOperator

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LinearSchemeOps:
    B: SpectralOperator
    tau: float
    a1: float
    a2: float

    def __post_init__(self):
        if not self.tau > 0:
            raise StepSizeError("time step tau must be positive")
        if not (self.a1 > 0 and self.a2 > 0):
            raise StepSizeError("a1 and a2 must be positive")
        if not 1.0 - self.tau * self.a > 0:
            raise StepSizeError(f"1 - tau*a > 0 violated (tau*a = {self.tau * self.a:g})")

    @property
    def a(self):
        return self.a2 / self.a1

    @property
    def b0(self):
        lam = self.B.eigenvalues
        return 1.0 + 0.5 * self.tau * self.a1 * lam + 0.5 * self.tau ** 2 * self.a2 * lam

    @property
    def b1(self):
        return self.b0 - self.tau * self.a1 * self.B.eigenvalues

    @property
    def L(self):
        return 2.0 / self.b0

    @property
    def S(self):
        return self.b1 / self.b0

    @property
    def modes(self):
        return self.B.modes


def step_linear(ops, u_prev, u_curr, f_k):
    """u_{k+1} from B0 u_{k+1} = 2 u_k - B1 u_{k-1} + tau^2 f_k."""
    u_prev, u_curr, f_k = (np.asarray(v, dtype=float) for v in (u_prev, u_curr, f_k))
    for v in (u_prev, u_curr, f_k):
        if v.shape != (ops.modes,):
            raise DimensionError(f"expected {ops.modes} modes, got shape {v.shape}")
    return (2.0 * u_curr - ops.b1 * u_prev + ops.tau ** 2 * f_k) / ops.b0


def _forcing_rows(ops, forcing, k):
    """Array with row i = f_i for i = 0..k+1 (row 0 and row k+1 zero)."""
    F = np.zeros((k + 2, ops.modes))
    forcing = np.asarray(forcing, dtype=float).reshape(-1, ops.modes) if len(forcing) else np.zeros((0, ops.modes))
    if forcing.shape[0] != k:
        raise DimensionError(f"need f_1..f_{k}, got {forcing.shape[0]} rows")
    F[1:k + 1] = forcing
    return F


def iterate_linear(ops, u0, u1, forcing):
    """States u_0..u_{k+1} by repeated :func:`step_linear`, with ``forcing = [f_1..f_k]``."""
    k = len(forcing)
    F = _forcing_rows(ops, forcing, k)
    return linear_steps(ops.b0, ops.b1, ops.tau, u0, u1, F)


def solve_by_representation(ops, u0, u1, forcing):
    """u_{k+1} = U_k(L,S) u_1 - S U_{k-1}(L,S) u_0 + (tau^2/2) sum_i U_{k-i}(L,S) L f_i.

    ``forcing`` is the list ``[f_1, ..., f_k]``; ``k = len(forcing)`` and k = 0
    returns ``u_1``.
    """
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    k = len(forcing)
    if k == 0:
        return u1.copy()
    L, S = ops.L, ops.S
    T = cheb_table(k, L, S)  # T[m, j] = U_m(L_j, S_j)
    F = np.asarray(forcing, dtype=float).reshape(k, ops.modes)
    out = T[k] * u1 - S * T[k - 1] * u0
    # i = 1..k pairs with U_{k-i} = T[k-1..0]
    out = out + 0.5 * ops.tau ** 2 * L * np.einsum("ij,ij->j", T[k - 1::-1], F)
    return out


# --------------------------------------------------------------------------
# Runs and a priori estimates


@dataclass
class LinearRun:
    """States ``u[0..n]`` of the linear scheme and the forcing ``f[k]`` used at step k."""

    ops: LinearSchemeOps
    u: np.ndarray
    f: np.ndarray
    length: float = math.pi

    @property
    def n(self):
        return self.u.shape[0] - 1


def run_linear(ops, u0, u1, forcing_rows, length=math.pi):
    """Iterate the scheme; ``forcing_rows`` has shape (n+1, J) with row k = f_k."""
    F = np.asarray(forcing_rows, dtype=float)
    U = linear_steps(ops.b0, ops.b1, ops.tau, u0, u1, F)
    return LinearRun(ops, U, F, length)


@dataclass
class EstimateReport:
    estimate_id: str
    s: float
    worst_ratio: float
    worst_step: int
    passed: bool
    constants: str = "published"

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


RATIO_TOL = 1e-12


def _norms(run, vectors, power):
    """||B^power v|| for each row of ``vectors``."""
    lam = run.ops.B.eigenvalues
    w = vectors if power == 0 else vectors * lam ** float(power)
    return np.sqrt(0.5 * run.length * np.einsum("ij,ij->i", w, w))


def _report(estimate_id, s, lhs, rhs, steps, constants):
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, 0.0))
    if ratio.size == 0:
        return EstimateReport(estimate_id, s, 0.0, 0, True, constants)
    i = int(np.argmax(ratio))
    worst = float(ratio[i])
    return EstimateReport(estimate_id, s, worst, int(steps[i]), bool(worst <= 1.0 + RATIO_TOL), constants)


def _check_constants(constants):
    if constants not in ("published", "corrected"):
        raise ValueError("constants must be 'published' or 'corrected'")
    # 'corrected' uses max |U_k(L,S)(I-S)| <= 2 instead of <= 1
    return 1.0 if constants == "published" else 2.0


def verify_estimate_u1(run, s, constants="published"):
    """Check ||B^s u_{k+1}|| against the data bound for every k = 1..n-1.

    RHS = sqrt2 ||B^s u0|| + (c/a1) ||B^{s-1} du0|| + (c tau/2)(1+tau a) ||B^s du0||
          + (c tau/a1) sum_{i<=k} ||B^{s-1} f_i||,   du0 = (u1-u0)/tau,
    with c = 1 for the published constants and c = 2 for the corrected ones.
    """
    c = _check_constants(constants)
    ops, tau, n = run.ops, run.ops.tau, run.n
    if n < 2:
        return EstimateReport("u1", s, 0.0, 0, True, constants)
    du0 = ((run.u[1] - run.u[0]) / tau)[None, :]
    u0 = run.u[:1]
    fsum = np.cumsum(_norms(run, run.f[1:n], s - 1))  # k = 1..n-1
    rhs = (SQRT2 * _norms(run, u0, s)[0]
           + c / ops.a1 * _norms(run, du0, s - 1)[0]
           + c * 0.5 * tau * (1 + tau * ops.a) * _norms(run, du0, s)[0]
           + c * tau / ops.a1 * fsum)
    lhs = _norms(run, run.u[2:n + 1], s)
    return _report("u1", s, lhs, rhs, np.arange(1, n), constants)


def verify_estimate_u2_1(run, s, constants="published"):
    """Check ||B^s (u_{k+1}-u_k)/tau|| <= c a ||B^s u0|| + sqrt2 ||B^s du0|| + sqrt2 tau sum ||B^s f_i||."""
    c = _check_constants(constants)
    ops, tau, n = run.ops, run.ops.tau, run.n
    estimate_id = "u2" if s == 0 else "u2.1"
    if n < 2:
        return EstimateReport(estimate_id, s, 0.0, 0, True, constants)
    du0 = ((run.u[1] - run.u[0]) / tau)[None, :]
    fsum = np.cumsum(_norms(run, run.f[1:n], s))
    rhs = (c * ops.a * _norms(run, run.u[:1], s)[0]
           + SQRT2 * _norms(run, du0, s)[0]
           + SQRT2 * tau * fsum)
    du = (run.u[2:n + 1] - run.u[1:n]) / tau
    lhs = _norms(run, du, s)
    return _report(estimate_id, s, lhs, rhs, np.arange(1, n), constants)


def verify_estimate_u2(run, constants="published"):
    return verify_estimate_u2_1(run, 0.0, constants)


def random_linear_problem(rng, max_modes=16, max_steps=100, min_margin=0.1, stiff=True):
    """A random linear run with 1 - tau*a >= min_margin.

    The spectrum of B is log-uniform in [1e-2, 1e4]. With ``stiff=False`` it
    is capped so that every S_j >= 0, i.e. tau a1 lambda (1 - tau a) <= 2.
    """
    J = int(rng.integers(1, max_modes + 1))
    a1 = float(10.0 ** rng.uniform(-1.0, 0.5))
    a2 = float(10.0 ** rng.uniform(-1.0, 0.5))
    a = a2 / a1
    tau_max = min(0.1, (1.0 - min_margin) / a)
    tau = float(10.0 ** rng.uniform(-3.0, np.log10(tau_max)))
    top = 4.0 if stiff else min(4.0, np.log10(2.0 / (tau * a1 * (1.0 - tau * a))))
    lam = np.sort(10.0 ** rng.uniform(-2.0, top, J))
    ops = LinearSchemeOps(SpectralOperator(lam, "B"), tau, a1, a2)
    n = int(rng.integers(2, max_steps + 2))
    u0 = rng.standard_normal(J)
    u1 = u0 + tau * rng.standard_normal(J)
    F = rng.standard_normal((n + 1, J))
    F[0] = 0.0
    F[n] = 0.0
    return ops, u0, u1, F


@dataclass
class EstimateSuite:
    reports: list
    runs: int
    seed: int
    constants: str

    @property
    def passed(self):
        return all(r.passed for r in self.reports)

    def worst(self, estimate_id, s):
        rs = [r for r in self.reports if r.estimate_id == estimate_id and r.s == s]
        return max(rs, key=lambda r: r.worst_ratio)

    def summary(self):
        keys = sorted({(r.estimate_id, r.s) for r in self.reports})
        rows = []
        for eid, s in keys:
            w = self.worst(eid, s)
            rows.append({"estimate_id": eid, "s": s, "worst_ratio": w.worst_ratio,
                         "worst_step": w.worst_step, "pass": w.passed,
                         "failing_runs": sum(1 for r in self.reports
                                             if r.estimate_id == eid and r.s == s and not r.passed)})
        return rows

    def to_dict(self):
        return {"runs": self.runs, "seed": self.seed, "constants": self.constants,
                "pass": self.passed, "estimates": self.summary()}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def estimate_suite(runs=100, seed=0, s_values=(0.0, 0.5, 1.0), constants="published", **problem_kw):
    """Run the three estimates on ``runs`` random linear problems."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(runs):
        ops, u0, u1, F = random_linear_problem(rng, **problem_kw)
        run = run_linear(ops, u0, u1, F)
        for s in s_values:
            reports.append(verify_estimate_u1(run, s, constants))
            if s != 0:
                reports.append(verify_estimate_u2_1(run, s, constants))
        reports.append(verify_estimate_u2(run, constants))
    return EstimateSuite(reports, runs, seed, constants)


REPRESENTATION_TOL = 1e-10


def representation_deviation(ops, u0, u1, forcing_rows):
    """Relative max-norm gap between the Chebyshev form and stepping at the last step."""
    F = np.asarray(forcing_rows, dtype=float)
    n = F.shape[0] - 1
    stepped = linear_steps(ops.b0, ops.b1, ops.tau, u0, u1, F)[n]
    closed = solve_by_representation(ops, u0, u1, F[1:n])
    scale = max(float(np.max(np.abs(stepped))), np.finfo(float).tiny)
    return float(np.max(np.abs(closed - stepped))) / scale


def representation_suite(runs=100, seed=0, tol=REPRESENTATION_TOL, **problem_kw):
    rng = np.random.default_rng(seed)
    devs = [representation_deviation(*random_linear_problem(rng, **problem_kw)) for _ in range(runs)]
    worst = max(devs) if devs else 0.0
    return {"runs": runs, "seed": seed, "max_rel_dev": worst, "tolerance": tol, "pass": bool(worst <= tol)}
