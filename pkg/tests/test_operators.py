import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballbeam.errors import ConfigError, DimensionError, NumericalError
from ballbeam.operators import (
    OperatorSet,
    SineSpace,
    SpectralOperator,
    apply,
    as_state,
    beam_operators,
    inner,
    norm_of,
    power,
)

vectors = st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=16).map(np.array)


def test_apply_diagonal():
    op = SpectralOperator([1.0, 4.0, 9.0])
    assert np.array_equal(apply(op, [1, 1, 1]), [1, 4, 9])
    assert np.array_equal(apply(SpectralOperator([2.0]), [0.0]), [0.0])


def test_laplacian_eigenvalues_for_pi():
    A = SineSpace(math.pi, 3).laplacian()
    np.testing.assert_allclose(A.eigenvalues, [1, 4, 9], rtol=1e-15)
    np.testing.assert_allclose(apply(A, [1, 0, 0]), [1, 0, 0])


def test_apply_length_mismatch():
    with pytest.raises(DimensionError):
        apply(SpectralOperator([1.0, 2.0]), [1.0, 2.0, 3.0])


def test_power_examples():
    np.testing.assert_allclose(power(SpectralOperator([4.0, 9.0]), 0.5).eigenvalues, [2, 3])
    assert power(SpectralOperator([4.0]), 0).eigenvalues[0] == 1.0
    assert power(SpectralOperator([4.0]), -0.5).eigenvalues[0] == 0.5


def test_operator_rejects_non_positive():
    with pytest.raises(ConfigError):
        SpectralOperator([1.0, 0.0])
    with pytest.raises(ConfigError):
        SpectralOperator([1.0, np.nan])


def test_inner_examples():
    assert inner([1, 0], [1, 0], length=2.0) == pytest.approx(1.0)
    assert inner([1, 0], [0, 1]) == 0.0
    assert inner([2, 1], [1, 3], length=math.pi) == pytest.approx(5 * math.pi / 2)


def test_inner_matches_quadrature():
    # oracle: integrate the sine expansions on a fine grid
    sp = SineSpace(2.0, 3)
    u, v = np.array([1.0, -0.5, 0.25]), np.array([0.3, 2.0, -1.0])
    x = np.linspace(0, 2.0, 20001)
    f = sp.evaluate(u, x) * sp.evaluate(v, x)
    assert sp.inner(u, v) == pytest.approx(np.trapezoid(f, x), rel=1e-7)


def test_norm_examples():
    assert norm_of([3, 4], length=2.0) == pytest.approx(5.0)
    assert norm_of([1, 1], SpectralOperator([1.0, 4.0]), 0.5, length=2.0) == pytest.approx(math.sqrt(5))


def test_as_state_checks():
    with pytest.raises(NumericalError):
        as_state([1.0, np.inf])
    with pytest.raises(DimensionError):
        as_state([[1.0]])
    with pytest.raises(DimensionError):
        as_state([1.0, 2.0], modes=3)


@given(vectors)
def test_parseval(u):
    assert inner(u, u) == pytest.approx(norm_of(u, None, 0) ** 2, rel=1e-12, abs=1e-300)


def test_power_law():
    B = SineSpace(math.pi, 32).bilaplacian()
    np.testing.assert_allclose(power(power(B, 0.5), 2).eigenvalues, B.eigenvalues, rtol=1e-14)


def test_bhalf_equals_a(rng):
    sp = SineSpace(1.7, 12)
    A, B = sp.laplacian(), sp.bilaplacian()
    for _ in range(1000):
        u = rng.standard_normal(12)
        a = norm_of(A.apply(u), length=sp.length)
        b = norm_of(u, B, 0.5, sp.length)
        assert a == pytest.approx(b, rel=1e-12)


@given(vectors)
def test_square_root_identity(u):
    lam = np.arange(1, u.size + 1, dtype=float) ** 2
    A = SpectralOperator(lam)
    lhs = norm_of(u, A, 0.5) ** 2
    rhs = inner(apply(A, u), u)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


def test_operator_set_defaults():
    sp = SineSpace(math.pi, 4)
    ops = beam_operators(sp, c_scale=0.5, delta=0.2)
    np.testing.assert_allclose(ops.C, 0.5 * sp.laplacian().eigenvalues)
    np.testing.assert_allclose(ops.N, 0.2)
    assert ops.norm_N == pytest.approx(0.2)
    assert ops.diagonal and not ops.is_conservative()
    assert beam_operators(sp).is_conservative()


def test_operator_set_validation():
    sp = SineSpace(math.pi, 4)
    with pytest.raises(ConfigError, match="b0"):
        OperatorSet(sp.laplacian(), sp.bilaplacian(), b0=0.5)
    with pytest.raises(ConfigError, match="a0"):
        beam_operators(sp, c_scale=2.0, a0=1.0)
    with pytest.raises(DimensionError):
        OperatorSet(sp.laplacian(), sp.bilaplacian(), N=np.ones((3, 3)))


def test_dense_maps():
    sp = SineSpace(math.pi, 3)
    N = np.array([[0.1, 0.2, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.3]])
    ops = OperatorSet(sp.laplacian(), sp.bilaplacian(), N=N)
    u = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(ops.apply_N(u), N @ u)
    assert ops.norm_N == pytest.approx(np.linalg.norm(N, 2))
    assert not ops.diagonal
