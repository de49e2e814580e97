"""Two-variable Chebyshev polynomials U_k(x, y) and their bounds.

``U_0 = 1``, ``U_1 = x``, ``U_{k+1} = x U_k - y U_{k-1}``. ``U_k(2x, 1)`` is the
classical Chebyshev polynomial of the second kind, and for ``y > 0``
``U_k(x, y) = y^(k/2) U_k(x / sqrt(y), 1)``.
"""
import enum
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._kernels import cheb_table
from .errors import DomainError

K_MAX_DEFAULT = 64
SLACK_TOL = 1e-12


def eval_recurrence(k, x, y):
    """U_k(x, y) by forward recurrence, accumulated in extended precision.

    ``x`` and ``y`` broadcast; the result is float64 (a Python float for
    scalar input).
    """
    if k < 0:
        raise DomainError("degree must be non-negative")
    xl = np.asarray(x, dtype=np.longdouble)
    yl = np.asarray(y, dtype=np.longdouble)
    um1 = np.ones(np.broadcast(xl, yl).shape, dtype=np.longdouble)
    if k == 0:
        return _out(um1)
    u = xl + np.zeros_like(um1)
    for _ in range(1, k):
        u, um1 = xl * u - yl * um1, u
    return _out(u)


def recurrence_table(k_max, x, y):
    """Extended-precision table ``U_0..U_k_max``; shape ``(k_max+1, *shape)``."""
    xl = np.asarray(x, dtype=np.longdouble)
    yl = np.asarray(y, dtype=np.longdouble)
    xl, yl = np.broadcast_arrays(xl, yl)
    out = np.empty((k_max + 1,) + xl.shape, dtype=np.longdouble)
    out[0] = 1
    if k_max >= 1:
        out[1] = xl
    for k in range(1, k_max):
        out[k + 1] = xl * out[k] - yl * out[k - 1]
    return out


def _out(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def _unit_chebyshev(k, xi):
    """U_k(xi, 1) in closed form (trigonometric inside [-2, 2], hyperbolic outside)."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    inside = np.abs(xi) < 2.0
    theta = np.arccos(xi[inside] / 2.0)
    s = np.sin(theta)
    small = s == 0.0
    vals = np.where(small, k + 1.0, np.sin((k + 1) * theta) / np.where(small, 1.0, s))
    out[inside] = vals
    outside = ~inside
    a = np.abs(xi[outside])
    sign = np.where(xi[outside] < 0, (-1.0) ** k, 1.0)
    edge = a == 2.0
    t = np.arccosh(np.where(edge, 2.0, a) / 2.0)
    sh = np.sinh(t)
    hyper = np.where(edge, k + 1.0, np.sinh((k + 1) * t) / np.where(edge, 1.0, sh))
    out[outside] = sign * hyper
    return out


def eval_scaled(k, x, y):
    """U_k(x, y) = y^(k/2) U_k(x/sqrt(y), 1) for y > 0."""
    if k < 0:
        raise DomainError("degree must be non-negative")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("eval_scaled requires y > 0")
    r = np.sqrt(y)
    return _out(r ** k * _unit_chebyshev(k, x / r))


def eval_taylor(k, x, y):
    """(U_k, U_k - sqrt(y) U_{k-1}) from their binomial expansions about xi = 2.

    U_k      = y^(k/2) sum_i C(k+i+1, 2i+1) (xi-2)^i
    U_k - sqrt(y) U_{k-1} = y^(k/2) sum_i C(k+i, 2i) (xi-2)^i,   xi = x/sqrt(y).
    """
    if k < 0:
        raise DomainError("degree must be non-negative")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("eval_taylor requires y > 0")
    r = np.sqrt(y)
    d = x / r - 2.0
    first = np.zeros(x.shape)
    second = np.zeros(x.shape)
    # Horner in (xi - 2)
    for i in range(k, -1, -1):
        first = first * d + math.comb(k + i + 1, 2 * i + 1)
        second = second * d + math.comb(k + i, 2 * i)
    scale = r ** k
    return _out(scale * first), _out(scale * second)


# --------------------------------------------------------------------------
# Regions


class Region(str, enum.Enum):
    DELTA = "Delta"
    DELTA_PLUS = "DeltaPlus"
    OMEGA_PLUS = "OmegaPlus"
    OMEGA_MINUS = "OmegaMinus"
    OMEGA_1 = "Omega1"
    OMEGA_2 = "Omega2"
    OUTSIDE = "Outside"


def in_delta(x, y):
    return (np.abs(y) < 1.0) & (np.abs(x) < y + 1.0)


def in_delta_plus(x, y):
    return in_delta(x, y) & (x >= 0.0)


def in_omega_plus(x, y, closed=False):
    disc = 4.0 * y - x * x
    return disc >= 0.0 if closed else disc > 0.0


def in_omega_minus(x, y):
    return 4.0 * y - x * x < 0.0


def in_omega1(x, y):
    # boundary 4y = x^2 inside Delta+ belongs to Omega1
    return in_delta_plus(x, y) & in_omega_plus(x, y, closed=True)


def in_omega2(x, y):
    return in_delta_plus(x, y) & in_omega_minus(x, y)


def classify(x, y):
    """Most specific region tag of a single point.

    Points of Delta+ are reported as Omega1 or Omega2, points of Delta with
    x < 0 as Delta, and everything else (including the boundary of Delta) as
    Outside.
    """
    x = float(x)
    y = float(y)
    if in_delta_plus(x, y):
        return Region.OMEGA_1 if in_omega_plus(x, y, closed=True) else Region.OMEGA_2
    if in_delta(x, y):
        return Region.DELTA
    return Region.OUTSIDE


def memberships(x, y):
    """All region tags containing the point."""
    x = float(x)
    y = float(y)
    tags = set()
    if in_delta(x, y):
        tags.add(Region.DELTA)
    if in_delta_plus(x, y):
        tags.add(Region.DELTA_PLUS)
    if in_omega_plus(x, y):
        tags.add(Region.OMEGA_PLUS)
    if in_omega_minus(x, y):
        tags.add(Region.OMEGA_MINUS)
    if in_omega1(x, y):
        tags.add(Region.OMEGA_1)
    if in_omega2(x, y):
        tags.add(Region.OMEGA_2)
    if not tags & {Region.DELTA}:
        tags.add(Region.OUTSIDE)
    return tags


# --------------------------------------------------------------------------
# Bound verification


@dataclass
class BoundResult:
    bound_id: str
    region: str
    k_max: int
    samples: int
    violations: int
    min_slack: float
    max_slack: float
    rejected: int = 0
    passed: bool = field(default=False)

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class BoundsReport:
    results: list
    k_max: int
    seed: int
    recurrence_max_rel_dev: float = 0.0
    recurrence_ok: bool = True
    supplementary: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.results) and self.recurrence_ok

    def by_id(self, bound_id):
        for r in self.results + self.supplementary:
            if r.bound_id == bound_id:
                return r
        raise KeyError(bound_id)

    def to_dict(self):
        return {
            "k_max": self.k_max,
            "seed": self.seed,
            "pass": self.passed,
            "bounds": [r.to_dict() for r in self.results],
            "supplementary": [r.to_dict() for r in self.supplementary],
            "closed_form_vs_recurrence": {
                "max_rel_dev": self.recurrence_max_rel_dev,
                "tolerance": 1e-10,
                "pass": self.recurrence_ok,
            },
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _region_mask(region, x, y):
    return {
        "Delta": in_delta,
        "DeltaPlus": in_delta_plus,
        "OmegaPlus": in_omega_plus,
        "Omega1": in_omega1,
        "Omega2": lambda a, b: in_omega2(a, b) & (b > 0.0),
    }[region](x, y)


# Bounding boxes for rejection sampling. Omega+ is unbounded; it is sampled
# for 0 < y <= 2, where U_k stays below 2^(k/2) (k+1).
_BOXES = {
    "Delta": ((-2.0, 2.0), (-1.0, 1.0)),
    "DeltaPlus": ((0.0, 2.0), (-1.0, 1.0)),
    "OmegaPlus": ((-2.0 * math.sqrt(2.0), 2.0 * math.sqrt(2.0)), (0.0, 2.0)),
    "Omega1": ((0.0, 2.0), (0.0, 1.0)),
    "Omega2": ((0.0, 2.0), (0.0, 1.0)),
}


def sample_region(region, n, rng):
    """``n`` uniform points inside ``region`` (rejection sampling in its box)."""
    (x0, x1), (y0, y1) = _BOXES[region]
    xs, ys = [], []
    have = 0
    while have < n:
        m = max(2 * (n - have), 1024)
        x = rng.uniform(x0, x1, m)
        y = rng.uniform(y0, y1, m)
        keep = _region_mask(region, x, y)
        xs.append(x[keep])
        ys.append(y[keep])
        have += int(keep.sum())
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def grid_region(region, per_axis):
    """Points of a ``per_axis`` x ``per_axis`` grid over the region's box that lie inside it."""
    (x0, x1), (y0, y1) = _BOXES[region]
    gx, gy = np.meshgrid(np.linspace(x0, x1, per_axis), np.linspace(y0, y1, per_axis))
    gx, gy = gx.ravel(), gy.ravel()
    keep = _region_mask(region, gx, gy)
    return gx[keep], gy[keep]


def _slacks(bound_id, T, x, y):
    """Per (k, point) slack = bound - value (>= 0 means the bound holds)."""
    k = np.arange(T.shape[0], dtype=np.longdouble)[:, None]
    ks = np.arange(1, T.shape[0], dtype=np.longdouble)[:, None]
    y = y[None, :]
    sy = np.sqrt(np.abs(y))
    if bound_id == "CH2.1":
        bound = (k + 1) * sy ** k
        return (bound - np.abs(T)) / np.maximum(1, bound)
    if bound_id == "CH3.1":
        return 1 - np.abs(T * (1 - y))
    if bound_id == "CH3":
        # |U_k| <= 1 + y + ... + y^k, multiplied through by (1 - y) > 0
        return (1 - y ** (k + 1)) - np.abs(T) * (1 - y)
    if bound_id == "CH6":
        return np.sqrt(2 * sy ** (2 * ks)) - np.abs(T[1:] - sy * T[:-1])
    if bound_id == "CH9":
        d = T[1:] - y * T[:-1]
        lower = sy ** ks * ((ks + 1) * (1 - sy) + sy)
        return np.minimum(d - lower, 1 - d)
    if bound_id == "CH11":
        return np.sqrt(np.longdouble(2)) - np.abs(T[1:] - y * T[:-1])
    if bound_id == "CH17":
        return np.sqrt(np.longdouble(2)) - np.abs(T[1:] - T[:-1])
    raise KeyError(bound_id)


BOUND_REGIONS = {
    "CH2.1": "OmegaPlus",
    "CH3.1": "Delta",
    "CH6": "Omega1",
    "CH9": "Omega2",
    "CH11": "DeltaPlus",
    "CH17": "DeltaPlus",
}
SUPPLEMENTARY_REGIONS = {"CH3": "Delta"}


def check_bound(bound_id, x, y, k_max=40, region=None):
    """Evaluate one inequality at the given points for k = 0..k_max.

    Points outside the bound's region are dropped and counted in ``rejected``.
    """
    region = region or BOUND_REGIONS.get(bound_id) or SUPPLEMENTARY_REGIONS[bound_id]
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    keep = _region_mask(region, x, y)
    rejected = int((~keep).sum())
    x, y = x[keep], y[keep]
    if x.size == 0:
        return BoundResult(bound_id, region, k_max, 0, 0, math.inf, math.inf, rejected, True)
    T = recurrence_table(k_max, x, y)
    slack = _slacks(bound_id, T, x.astype(np.longdouble), y.astype(np.longdouble))
    worst_per_point = slack.min(axis=0)
    lo = float(slack.min())
    hi = float(slack.max())
    violations = int((worst_per_point < -SLACK_TOL).sum())
    return BoundResult(bound_id, region, k_max, int(x.size), violations, lo, hi, rejected, violations == 0)


def closed_form_deviation(k_max=40, samples=2000, seed=0):
    """Worst envelope-relative gap between eval_scaled and the recurrence.

    Points: y in [0.01, 4], |x| <= 3 sqrt(y). The gap is measured relative to
    max(|U_k|, y^(k/2)), since pointwise relative error is meaningless at roots.
    """
    rng = np.random.default_rng(seed)
    y = rng.uniform(0.01, 4.0, samples)
    x = rng.uniform(-1.0, 1.0, samples) * 3.0 * np.sqrt(y)
    T = recurrence_table(k_max, x, y).astype(float)
    worst = 0.0
    for k in range(k_max + 1):
        closed = eval_scaled(k, x, y)
        env = np.maximum(np.abs(T[k]), np.sqrt(y) ** k)
        worst = max(worst, float(np.max(np.abs(closed - T[k]) / env)))
    return worst


def verify_bounds(k_max=40, samples=10_000, seed=0, method="random", per_axis=200, points=None):
    """Sample every bound on its region and report slack statistics.

    ``method="random"`` draws ``samples`` uniform points per region,
    ``method="grid"`` uses a ``per_axis`` square grid clipped to each region,
    and ``points=(x, y)`` checks caller-supplied points, rejecting those that
    fall outside each bound's region.
    """
    rng = np.random.default_rng(seed)

    def pts(region):
        if points is not None:
            return points
        if method == "grid":
            return grid_region(region, per_axis)
        return sample_region(region, samples, rng)

    results = [check_bound(b, *pts(r), k_max=k_max) for b, r in BOUND_REGIONS.items()]
    supplementary = [check_bound(b, *pts(r), k_max=k_max) for b, r in SUPPLEMENTARY_REGIONS.items()]
    dev = closed_form_deviation(k_max=k_max, seed=seed)
    return BoundsReport(results, k_max, seed, dev, dev <= 1e-10, supplementary)


def sign_change_locations(k, y, points=4000):
    """Approximate roots of U_k(., y) on [-3 sqrt(y), 3 sqrt(y)].

    Grid points where U_k vanishes exactly count as roots; otherwise a root
    is the midpoint of a cell whose end values have opposite signs.
    """
    r = math.sqrt(y)
    x = np.linspace(-3 * r, 3 * r, points)
    vals = cheb_table(k, x, np.full_like(x, y))[k]
    sg = np.sign(vals)
    cells = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
    roots = np.concatenate([x[sg == 0], 0.5 * (x[cells] + x[cells + 1])])
    return np.sort(roots)
