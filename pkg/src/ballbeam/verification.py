"""Manufactured solutions, convergence-order studies and perturbation studies."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .model import BallParameters, ball_model
from .nonlinear_scheme import SchemeConfig, run
from .operators import SineSpace
from .step_solver import IterationConfig

SELF_TEST_TOL = 1e-10


# --------------------------------------------------------------------------
# Time profiles g(t) with closed-form derivatives


@dataclass(frozen=True)
class Profile:
    name: str
    g: Callable[[float], float]
    dg: Callable[[float], float]
    d2g: Callable[[float], float]


def make_profile(kind, amplitude=1.0, omega=1.0, sigma=1.0, coeffs=(1.0,)):
    """``cos``: A cos(omega t); ``exp``: A exp(-sigma t); ``poly``: sum c_i t^i."""
    A = float(amplitude)
    if kind == "cos":
        w = float(omega)
        return Profile("cos", lambda t: A * math.cos(w * t), lambda t: -A * w * math.sin(w * t),
                       lambda t: -A * w * w * math.cos(w * t))
    if kind == "exp":
        s = float(sigma)
        return Profile("exp", lambda t: A * math.exp(-s * t), lambda t: -A * s * math.exp(-s * t),
                       lambda t: A * s * s * math.exp(-s * t))
    if kind == "poly":
        p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        dp, d2p = p.deriv(1), p.deriv(2)
        return Profile("poly", lambda t: float(p(t)), lambda t: float(dp(t)), lambda t: float(d2p(t)))
    raise ConfigError(f"unsupported time profile {kind!r} (use cos, exp or poly)")


def _derivatives_match(profile, t, h=1e-3, rtol=1e-6):
    g = profile.g
    gm2, gm1, g0, gp1, gp2 = (g(t + i * h) for i in (-2, -1, 0, 1, 2))
    d1 = (gm2 - 8 * gm1 + 8 * gp1 - gp2) / (12 * h)
    d2 = (-gm2 + 16 * gm1 - 30 * g0 + 16 * gp1 - gp2) / (12 * h * h)
    scale = 1.0 + abs(g0)
    return abs(d1 - profile.dg(t)) <= rtol * scale and abs(d2 - profile.d2g(t)) <= rtol * scale


@dataclass(frozen=True)
class ManufacturedCase:
    """u(x, t) = g(t) sin(j pi x / l) for the Ball beam with a derived forcing."""

    j: int
    profile: Profile
    params: BallParameters
    space: SineSpace

    def __post_init__(self):
        if not 1 <= self.j <= self.space.modes:
            raise ConfigError(f"manufactured mode j={self.j} outside 1..{self.space.modes}")

    @property
    def lam(self):
        return (self.j * math.pi / self.space.length) ** 2

    @property
    def kappa(self):
        return 0.5 * self.space.length * self.lam

    def model(self):
        return ball_model(self.space, self.params)

    def _e(self, value):
        e = np.zeros(self.space.modes)
        e[self.j - 1] = value
        return e

    def exact(self, t):
        return self._e(self.profile.g(t))

    def exact_velocity(self, t):
        return self._e(self.profile.dg(t))

    def exact_acceleration(self, t):
        return self._e(self.profile.d2g(t))

    def forcing_scalar(self, t):
        p, lam, kap = self.params, self.lam, self.kappa
        g, dg, d2g = self.profile.g(t), self.profile.dg(t), self.profile.d2g(t)
        return (d2g + p.a1 * lam ** 2 * dg + p.a2 * lam ** 2 * g
                + (p.alpha + p.beta * kap * g * g) * lam * g
                + 2.0 * p.gamma * kap * g * dg * lam * g + p.delta * dg)

    def forcing(self, t):
        return self._e(self.forcing_scalar(t))

    def residual(self, t, model=None):
        """Continuous-equation residual of the exact solution, assembled from the model."""
        m = model or self.model()
        ops, tri = m.ops, m.triple
        u, du, d2u = self.exact(t), self.exact_velocity(t), self.exact_acceleration(t)
        lamA, lamB = ops.A.eigenvalues, ops.B.eigenvalues
        g = m.gamma(u)
        dgamma = 2.0 * m.space.weight * float((lamA * u) @ du)
        lhs = (d2u + m.a1 * lamB * du + m.a2 * lamB * u + tri.psi1(g) * lamA * u
               + tri.psi2.derivative(g) * dgamma * lamA * u + tri.psi3(m.theta(u)) * u
               + ops.apply_C(u) + ops.apply_N(du) + ops.apply_M(u))
        return lhs - self.forcing(t)

    def self_test(self, t_end=1.0, samples=20, tol=SELF_TEST_TOL):
        """Max relative residual over ``samples`` times in [0, t_end].

        The closed-form g', g'' are also compared against five-point finite
        differences of g, since the residual alone cannot see a wrong
        derivative that enters both sides.
        """
        m = self.model()
        worst = 0.0
        deriv_ok = True
        for t in np.linspace(0.0, t_end, samples):
            r = np.max(np.abs(self.residual(t, m)))
            worst = max(worst, r / (1.0 + np.max(np.abs(self.forcing(t)))))
            deriv_ok &= _derivatives_match(self.profile, t)
        return worst, bool(worst <= tol and deriv_ok)

    def scheme_config(self, n, t_end=1.0, start="second", iteration=None):
        return SchemeConfig(self.model(), t_end, n, self.exact(0.0), self.exact_velocity(0.0),
                            forcing=self.forcing, iteration=iteration or IterationConfig(), start=start)


def build_manufactured(j=1, profile="cos", params=BallParameters(), length=math.pi, modes=8,
                       check=True, **profile_kw):
    if isinstance(profile, str):
        profile = make_profile(profile, **profile_kw)
    case = ManufacturedCase(int(j), profile, params, SineSpace(length, modes))
    if check:
        worst, ok = case.self_test()
        if not ok:
            raise ConfigError(f"manufactured residual self-test failed ({worst:.3e})")
    return case


# --------------------------------------------------------------------------
# Error metric shared by both studies


def error_metric(model, Z, tau):
    """max_k ||B^(1/2) z_{k+1}|| + ||(z_{k+1} - z_k)/tau|| and its value at the last step."""
    w = model.space.weight
    lamB = model.ops.B.eigenvalues
    zB = np.sqrt(w * np.einsum("ij,j,ij->i", Z[1:], lamB, Z[1:]))
    dZ = np.diff(Z, axis=0) / tau
    zd = np.sqrt(w * np.einsum("ij,ij->i", dZ, dZ))
    e = zB + zd
    return float(e.max()), float(e[-1])


def _pmap(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class ConvergenceReport:
    rows: list
    start: str
    band: tuple
    passed: bool

    @property
    def orders(self):
        return [r["order"] for r in self.rows[1:]]

    def to_dict(self):
        return {"start": self.start, "band": list(self.band), "pass": self.passed, "rows": self.rows}


ORDER_BANDS = {"second": (1.8, 2.2), "first": (0.8, 1.2)}


def convergence_study(case, n_list=(100, 200, 400, 800), t_end=1.0, start="second",
                      iteration=None, workers=1):
    """Observed orders p_i = log(E_i / E_{i+1}) / log(n_{i+1} / n_i)."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("study.n_list needs at least two increasing entries")

    def one(n):
        cfg = case.scheme_config(n, t_end, start, iteration)
        res = run(cfg)
        t = np.arange(n + 1) * cfg.tau
        exact = np.array([case.exact(tk) for tk in t])
        return (cfg.tau,) + error_metric(cfg.model, exact - res.states, cfg.tau)

    results = _pmap(one, n_list, workers)
    rows = []
    for i, (n, (tau, E, Ef)) in enumerate(zip(n_list, results)):
        order = None
        if i > 0:
            order = math.log(rows[-1]["E"] / E) / math.log(n / rows[-1]["n"])
        rows.append({"n": n, "tau": tau, "E": E, "E_final": Ef, "order": order})
    lo, hi = ORDER_BANDS[start]
    ok = all(lo <= r["order"] <= hi for r in rows[1:])
    return ConvergenceReport(rows, start, (lo, hi), ok)


# --------------------------------------------------------------------------
# Perturbation study


@dataclass
class PerturbationReport:
    eps: list
    D: list
    R: list
    quotient: list
    spread: float
    passed: bool
    seed: int
    max_spread: float = 3.0
    directions: dict = field(default_factory=dict)

    def to_dict(self):
        return {"eps": self.eps, "D": self.D, "R": self.R, "quotient": self.quotient,
                "spread": self.spread, "max_spread": self.max_spread, "pass": self.passed,
                "seed": self.seed, "directions": self.directions}


def perturbation_directions(modes, seed):
    """Smooth random directions for phi0, phi1 and a constant-in-time f."""
    rng = np.random.default_rng(seed)
    decay = 1.0 / np.arange(1, modes + 1) ** 2
    return {key: rng.standard_normal(modes) * decay for key in ("phi0", "phi1", "f")}


def perturbation_study(config, eps_list=(1e-2, 1e-3, 1e-4), seed=0, max_spread=3.0, workers=1):
    """Stability quotient D(eps)/R(eps) for data perturbed by eps times fixed directions."""
    m = config.model
    dirs = perturbation_directions(m.space.modes, seed)
    base = run(config)
    tau, n = config.tau, config.n
    w = m.space.weight
    lamB = m.ops.B.eigenvalues

    def bnorm(z):
        return math.sqrt(w * float(lamB * z @ z))

    def norm(z):
        return math.sqrt(w * float(z @ z))

    def one(eps):
        base_f = config.forcing
        df = eps * dirs["f"]
        if base_f is None:
            forcing = lambda t: df  # noqa: E731
        else:
            forcing = lambda t: base_f(t) + df  # noqa: E731
        pert = SchemeConfig(m, config.t_end, n, config.phi0 + eps * dirs["phi0"],
                            config.phi1 + eps * dirs["phi1"], forcing, config.iteration, config.start)
        res = run(pert)
        Z = res.states - base.states
        D, _ = error_metric(m, Z, tau)
        dz0 = (Z[1] - Z[0]) / tau
        R = bnorm(Z[0]) + norm(dz0) + tau * bnorm(dz0) + tau * (n - 1) * norm(df)
        return D, R

    out = _pmap(one, list(eps_list), workers)
    D = [d for d, _ in out]
    R = [r for _, r in out]
    Q = [d / r if r > 0 else 0.0 for d, r in zip(D, R)]
    spread = max(Q) / min(Q) if min(Q) > 0 else math.inf
    return PerturbationReport(list(map(float, eps_list)), D, R, Q, spread, bool(spread <= max_spread),
                              seed, max_spread, {k: v.tolist() for k, v in dirs.items()})
