import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballbeam._kernels import cheb_table
from ballbeam.errors import StepSizeError
from ballbeam.linear_scheme import (
    LinearSchemeOps,
    estimate_suite,
    iterate_linear,
    random_linear_problem,
    representation_suite,
    run_linear,
    solve_by_representation,
    step_linear,
    verify_estimate_u1,
    verify_estimate_u2,
    verify_estimate_u2_1,
)
from ballbeam.operators import SpectralOperator


def make_ops(lam, tau=0.1, a1=1.0, a2=1.0):
    return LinearSchemeOps(SpectralOperator(np.atleast_1d(np.asarray(lam, dtype=float))), tau, a1, a2)


spectra = st.lists(st.floats(1e-3, 1e5), min_size=1, max_size=16)
params = st.tuples(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.0, 0.95))


def _ops_from(lam, p):
    a1, a2, frac = p
    tau = max(frac, 1e-3) * min(0.1, 0.9 * a1 / a2)
    return make_ops(lam, tau, a1, a2)


def test_step_size_guard():
    with pytest.raises(StepSizeError, match="1 - tau\\*a > 0"):
        make_ops([1.0], tau=1.0, a1=1.0, a2=1.0)


@given(spectra, params)
def test_spectral_inclusion_and_identities(lam, p):
    ops = _ops_from(lam, p)
    L, S, lamB = ops.L, ops.S, ops.B.eigenvalues
    ta = ops.tau * ops.a
    assert np.all((L > 0) & (L <= 2))
    assert np.all((S >= -1) & (S <= 1))
    np.testing.assert_allclose(S, L / (1 + ta) - (1 - ta) / (1 + ta), atol=1e-13)
    np.testing.assert_allclose(1 - S, 0.5 * ops.tau * ops.a1 * lamB * L, rtol=1e-13, atol=1e-13)
    # (eta(S), S) = (L, S) lies in the closure of Delta+
    assert np.all(L >= 0) and np.all(np.abs(S) <= 1) and np.all(L <= S + 1 + 1e-15)


def test_step_leapfrog_limit():
    ops = make_ops([1e-14], tau=0.1)
    out = step_linear(ops, [1.0], [1.5], [2.0])
    assert out[0] == pytest.approx(2 * 1.5 - 1.0 + 0.01 * 2.0, rel=1e-12)


def test_step_matches_companion_matrix():
    tau, a1, a2, lam = 0.1, 1.0, 1.0, 1.0
    ops = make_ops([lam], tau, a1, a2)
    b0 = 1 + tau * a1 * lam / 2 + tau ** 2 * a2 * lam / 2
    b1 = b0 - tau * a1 * lam
    # (u_k, u_{k+1}) = M (u_{k-1}, u_k) with M the companion matrix of the recurrence
    M = np.array([[0.0, 1.0], [-b1 / b0, 2.0 / b0]])
    expected = (M @ np.array([1.0, 1.0]))[1]
    assert step_linear(ops, [1.0], [1.0], [0.0])[0] == pytest.approx(expected, rel=1e-15)
    assert np.all(step_linear(ops, [0.0], [0.0], [0.0]) == 0.0)


def test_representation_base_cases(rng):
    ops = make_ops(10 ** rng.uniform(-2, 3, 5), 0.05, 0.8, 1.3)
    u0, u1 = rng.standard_normal(5), rng.standard_normal(5)
    np.testing.assert_array_equal(solve_by_representation(ops, u0, u1, []), u1)
    np.testing.assert_allclose(solve_by_representation(ops, u0, u1, [np.zeros(5)]),
                               ops.L * u1 - ops.S * u0, rtol=1e-14)
    np.testing.assert_allclose(solve_by_representation(ops, u0, u1, [np.zeros(5)]),
                               step_linear(ops, u0, u1, np.zeros(5)), rtol=1e-14, atol=1e-15)


def test_representation_k50(rng):
    ops = make_ops(10 ** rng.uniform(-2, 4, 4), 0.02, 1.0, 2.0)
    u0, u1 = rng.standard_normal(4), rng.standard_normal(4)
    F = rng.standard_normal((50, 4))
    stepped = iterate_linear(ops, u0, u1, F)[-1]
    closed = solve_by_representation(ops, u0, u1, F)
    assert np.max(np.abs(closed - stepped) / np.abs(stepped)) <= 1e-10


def test_representation_suite():
    rep = representation_suite(runs=100, seed=3)
    assert rep["pass"], rep


def _random_problems(n, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return [random_linear_problem(rng, **kw) for _ in range(n)]


def test_u17_sharp_form_holds():
    # |U_k(L,S)(1-S)| <= 1 - S^(k+1) <= 2 for every mode
    for ops, *_ in _random_problems(100):
        T = cheb_table(100, ops.L, ops.S)
        k = np.arange(101)[:, None]
        lhs = np.abs(T * (1 - ops.S))
        assert np.all(lhs <= 1 - ops.S ** (k + 1) + 1e-12)


def test_u17_holds_for_nonnegative_S():
    for ops, *_ in _random_problems(100, stiff=False):
        assert np.all(ops.S >= -1e-15)
        T = cheb_table(100, ops.L, ops.S)
        assert np.all(np.abs(T * (1 - ops.S)) <= 1 + 1e-12)


@pytest.mark.xfail(strict=True, reason="published bound |U_k(L,S)(I-S)| <= 1 fails for modes with S < 0")
def test_u17_published_form():
    for ops, *_ in _random_problems(100):
        T = cheb_table(100, ops.L, ops.S)
        assert np.all(np.abs(T * (1 - ops.S)) <= 1 + 1e-12)


def test_u20():
    for ops, *_ in _random_problems(100):
        T = cheb_table(100, ops.L, ops.S)
        assert np.all(np.abs(T[1:] - ops.S * T[:-1]) <= math.sqrt(2) + 1e-12)


def test_estimates_zero_data():
    ops = make_ops([1.0, 5.0])
    run = run_linear(ops, np.zeros(2), np.zeros(2), np.zeros((11, 2)))
    for rep in (verify_estimate_u1(run, 0.5), verify_estimate_u2(run), verify_estimate_u2_1(run, 1.0)):
        assert rep.passed and rep.worst_ratio == 0.0


def test_estimate_u1_single_mode_unforced(rng):
    ops = make_ops([3.0], 0.05, 1.0, 1.0)
    u0 = rng.standard_normal(1)
    run = run_linear(ops, u0, u0 + 0.05 * rng.standard_normal(1), np.zeros((201, 1)))
    rep = verify_estimate_u1(run, 1.0)
    assert rep.passed, rep


def test_estimate_u1_forced(rng):
    lam = (np.arange(1, 9) ** 4).astype(float)
    ops = make_ops(lam, 0.01, 1.0, 1.0)
    F = rng.standard_normal((501, 8))
    u0 = rng.standard_normal(8)
    run = run_linear(ops, u0, u0 + 0.01 * rng.standard_normal(8), F)
    assert verify_estimate_u1(run, 0.5).passed


def test_estimate_u2_initial_velocity(rng):
    ops = make_ops(10 ** rng.uniform(-1, 4, 8), 0.01, 1.0, 1.0)
    run = run_linear(ops, np.zeros(8), 0.01 * rng.standard_normal(8), np.zeros((501, 8)))
    rep = verify_estimate_u2(run)
    assert rep.passed, rep


def test_estimate_u2_random(rng):
    lam = (np.arange(1, 9) ** 4).astype(float)
    ops = make_ops(lam, 0.01, 1.0, 1.0)
    u0 = rng.standard_normal(8)
    run = run_linear(ops, u0, u0 + 0.01 * rng.standard_normal(8), rng.standard_normal((501, 8)))
    assert verify_estimate_u2(run).passed


def _stiff_counterexample_u2():
    # u1 = u0, f = 0 on one stiff mode: ratio tau a1 lam / B0 -> 2 / (1 + tau a)
    ops = make_ops([1e4], 0.01, 1.0, 1.0)
    return run_linear(ops, np.ones(1), np.ones(1), np.zeros((3, 1)))


def _stiff_counterexample_u1():
    ops = make_ops([1e4], 0.01, 1.0, 1.0)
    F = np.zeros((3, 1))
    F[1] = 1.0
    return run_linear(ops, np.zeros(1), np.zeros(1), F)


def test_published_constants_counterexamples():
    rep2 = verify_estimate_u2(_stiff_counterexample_u2())
    ops = _stiff_counterexample_u2().ops
    expected = ops.tau * ops.a1 * 1e4 / ops.b0[0]
    assert rep2.worst_ratio == pytest.approx(expected, rel=1e-12)
    assert not rep2.passed
    rep1 = verify_estimate_u1(_stiff_counterexample_u1(), 1.0)
    assert rep1.worst_ratio == pytest.approx(expected, rel=1e-12)
    assert not rep1.passed


def test_corrected_constants_cover_counterexamples():
    assert verify_estimate_u2(_stiff_counterexample_u2(), constants="corrected").passed
    assert verify_estimate_u1(_stiff_counterexample_u1(), 1.0, constants="corrected").passed


def test_suite_nonstiff_published_constants():
    suite = estimate_suite(runs=60, seed=5, stiff=False)
    assert suite.passed, suite.summary()


def test_suite_corrected_constants():
    suite = estimate_suite(runs=100, seed=0, constants="corrected")
    assert suite.passed, suite.summary()


def test_suite_serialization():
    suite = estimate_suite(runs=3, seed=1)
    d = suite.to_dict()
    assert {"estimate_id", "s", "worst_ratio", "worst_step", "pass"} <= set(d["estimates"][0])
    assert suite.reports[0].to_dict()["pass"] in (True, False)
