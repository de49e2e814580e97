"""Hot loops, each with a numba kernel and a pure-numpy counterpart.

The public wrappers (no leading underscore) pick the kernel according to
:func:`ballbeam._accel.numba_enabled`. The numpy versions are the reference
semantics; tests assert that both agree.
"""
import numpy as np

from ._accel import njit, numba_enabled

# Status codes returned by the nonlinear run kernel.
OK = 0
NOT_CONVERGED = 1
NON_FINITE = 2
NON_POSITIVE = 3

# Ratio of successive increments is only trusted when the older increment is
# this many machine epsilons above the solution scale.
NOISE_FLOOR = 1e6 * np.finfo(float).eps


# --------------------------------------------------------------------------
# Two-variable Chebyshev table U_0..U_kmax at many points

def cheb_table_numpy(kmax, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for k in range(1, kmax):
        out[k + 1] = x * out[k] - y * out[k - 1]
    return out


@njit
def _cheb_table_flat(kmax, x, y):
    npts = x.shape[0]
    out = np.empty((kmax + 1, npts))
    for p in range(npts):
        xp = x[p]
        yp = y[p]
        um1 = 1.0
        out[0, p] = 1.0
        if kmax >= 1:
            u = xp
            out[1, p] = u
            for k in range(1, kmax):
                nxt = xp * u - yp * um1
                um1 = u
                u = nxt
                out[k + 1, p] = u
    return out


def cheb_table(kmax, x, y):
    """Array of shape ``(kmax+1, *broadcast(x, y).shape)`` holding U_k(x, y)."""
    if not numba_enabled():
        return cheb_table_numpy(kmax, x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    flat = _cheb_table_flat(int(kmax), np.ascontiguousarray(x).ravel(), np.ascontiguousarray(y).ravel())
    return flat.reshape((kmax + 1,) + x.shape)


# --------------------------------------------------------------------------
# Linear three-layer stepping B0 u_{k+1} = 2 u_k - B1 u_{k-1} + tau^2 f_k

def linear_steps_numpy(b0, b1, tau, u0, u1, forcing):
    n = forcing.shape[0] - 1
    U = np.empty((n + 1, b0.shape[0]))
    U[0] = u0
    U[1] = u1
    t2 = tau * tau
    for k in range(1, n):
        U[k + 1] = (2.0 * U[k] - b1 * U[k - 1] + t2 * forcing[k]) / b0
    return U


@njit
def _linear_steps_jit(b0, b1, tau, u0, u1, forcing):
    n = forcing.shape[0] - 1
    J = b0.shape[0]
    U = np.empty((n + 1, J))
    U[0, :] = u0
    U[1, :] = u1
    t2 = tau * tau
    for k in range(1, n):
        for j in range(J):
            U[k + 1, j] = (2.0 * U[k, j] - b1[j] * U[k - 1, j] + t2 * forcing[k, j]) / b0[j]
    return U


def linear_steps(b0, b1, tau, u0, u1, forcing):
    """States u_0..u_n; ``forcing[k]`` is f_k (row 0 and row n are unused)."""
    args = (
        np.ascontiguousarray(b0, dtype=float),
        np.ascontiguousarray(b1, dtype=float),
        float(tau),
        np.ascontiguousarray(u0, dtype=float),
        np.ascontiguousarray(u1, dtype=float),
        np.ascontiguousarray(forcing, dtype=float),
    )
    if numba_enabled():
        return _linear_steps_jit(*args)
    return linear_steps_numpy(*args)


# --------------------------------------------------------------------------
# Polynomial helpers shared by the nonlinear kernel and nonlinearity.py

@njit
def poly_eval(c, s):
    acc = 0.0
    for i in range(c.shape[0] - 1, -1, -1):
        acc = acc * s + c[i]
    return acc


@njit
def poly_mean(c, a, b):
    """(1/(b-a)) int_a^b p(s) ds without cancellation.

    Uses int_a^b s^n ds / (b-a) = (1/(n+1)) sum_{i=0}^n lo^i hi^(n-i); the
    arguments are ordered first so the result is exactly symmetric.
    """
    lo = a if a <= b else b
    hi = b if a <= b else a
    h = 1.0
    lo_pow = 1.0
    acc = c[0]
    for n in range(1, c.shape[0]):
        lo_pow *= lo
        h = hi * h + lo_pow
        acc += c[n] * h / (n + 1)
    return acc


# --------------------------------------------------------------------------
# Full nonlinear run for diagonal operators and polynomial psi's

@njit
def _nonlinear_run_jit(lamA, lamB, cdiag, ndiag, weight, a1, a2, tau,
                       p1, p2, p3, forcing, u0, u1, tol, max_iter):
    n = forcing.shape[0] - 1
    J = lamA.shape[0]
    U = np.empty((n + 1, J))
    U[0, :] = u0
    U[1, :] = u1
    iters = np.zeros(n + 1, dtype=np.int64)
    contraction = np.zeros(n + 1)
    sqB = np.sqrt(lamB)
    v = np.empty(J)
    vnew = np.empty(J)
    ftil = np.empty(J)
    expl = np.empty(J)
    T = np.empty(J)
    for k in range(1, n):
        gp = 0.0
        thp = 0.0
        for j in range(J):
            up = U[k - 1, j]
            gp += lamA[j] * up * up
            thp += up * up
        gp *= weight
        thp *= weight
        psi2_prev = poly_eval(p2, gp)
        for j in range(J):
            up = U[k - 1, j]
            uc = U[k, j]
            gt = tau * forcing[k, j] + ndiag[j] * up - tau * cdiag[j] * uc
            ftil[j] = tau * gt + tau * a1 * lamB[j] * up + 2.0 * uc
            expl[j] = 0.5 * tau * psi2_prev * lamA[j] - tau * ndiag[j]
            v[j] = 0.5 * (uc + up)
        prev_diff = -1.0
        prev_ref = 0.0
        q = 0.0
        m = 0
        converged = False
        diff = 0.0
        while m < max_iter:
            g = 0.0
            th = 0.0
            for j in range(J):
                un = 2.0 * v[j] - U[k - 1, j]
                g += lamA[j] * un * un
                th += un * un
            g *= weight
            th *= weight
            a1k = poly_mean(p1, gp, g)
            a3k = poly_mean(p3, thp, th)
            b = tau * a1k + 0.5 * poly_eval(p2, g)
            diff = 0.0
            ref = 0.0
            for j in range(J):
                T[j] = (2.0 + tau * tau * a3k) + tau * (a1 + tau * a2) * lamB[j] + tau * b * lamA[j]
                if not T[j] >= 2.0:
                    return U, iters, contraction, NON_POSITIVE, k, 0.0
                vnew[j] = (expl[j] * v[j] + ftil[j]) / T[j]
                d = sqB[j] * (vnew[j] - v[j])
                diff += d * d
                r = sqB[j] * v[j]
                ref += r * r
            diff = np.sqrt(weight * diff)
            ref = np.sqrt(weight * ref)
            m += 1
            if not np.isfinite(diff):
                return U, iters, contraction, NON_FINITE, k, diff
            if prev_diff > NOISE_FLOOR * (1.0 + prev_ref):
                ratio = diff / prev_diff
                if ratio > q:
                    q = ratio
            prev_diff = diff
            prev_ref = ref
            for j in range(J):
                v[j] = vnew[j]
            if diff <= tol * (1.0 + ref):
                converged = True
                break
        iters[k + 1] = m
        contraction[k + 1] = q
        for j in range(J):
            U[k + 1, j] = 2.0 * v[j] - U[k - 1, j]
        if not converged:
            return U, iters, contraction, NOT_CONVERGED, k, diff
    return U, iters, contraction, OK, 0, 0.0


def nonlinear_run(lamA, lamB, cdiag, ndiag, weight, a1, a2, tau, p1, p2, p3, forcing, u0, u1, tol, max_iter):
    c = np.ascontiguousarray
    return _nonlinear_run_jit(
        c(lamA, dtype=float), c(lamB, dtype=float), c(cdiag, dtype=float), c(ndiag, dtype=float),
        float(weight), float(a1), float(a2), float(tau),
        c(p1, dtype=float), c(p2, dtype=float), c(p3, dtype=float),
        c(forcing, dtype=float), c(u0, dtype=float), c(u1, dtype=float),
        float(tol), int(max_iter),
    )
