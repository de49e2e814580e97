import math

import numpy as np
import pytest

from ballbeam.errors import ConfigError
from ballbeam.model import BallParameters
from ballbeam.nonlinear_scheme import SchemeConfig, run
from ballbeam.verification import (
    build_manufactured,
    convergence_study,
    error_metric,
    make_profile,
    perturbation_study,
)

LINEAR = BallParameters(a1=0.5, a2=1.0, alpha=0.0, beta=0.0, gamma=0.0, delta=0.0)


def test_zero_profile():
    case = build_manufactured(2, "poly", coeffs=[0.0], modes=4)
    for t in (0.0, 0.3, 1.0):
        assert np.all(case.forcing(t) == 0.0)
        assert np.all(case.exact(t) == 0.0)


def test_static_profile():
    p = BallParameters()
    case = build_manufactured(2, "poly", p, length=2.0, modes=4, coeffs=[1.0])
    lam = (2 * math.pi / 2.0) ** 2
    kappa = 1.0 * lam
    expected = p.a2 * lam ** 2 + (p.alpha + p.beta * kappa) * lam
    for t in (0.0, 0.7):
        f = case.forcing(t)
        assert f[1] == pytest.approx(expected, rel=1e-14)
        assert np.count_nonzero(f) == 1


@pytest.mark.parametrize("profile,kw", [("cos", {"omega": 1.0}), ("cos", {"omega": 2.5}),
                                        ("exp", {"sigma": 0.7}), ("poly", {"coeffs": [1.0, -0.5, 0.25]})])
@pytest.mark.parametrize("j", [1, 3])
def test_self_test(profile, kw, j):
    case = build_manufactured(j, profile, **kw)
    worst, ok = case.self_test()
    assert ok and worst <= 1e-10


def test_self_test_detects_wrong_derivative():
    from dataclasses import replace

    case = build_manufactured(1, "cos")
    wrong = replace(case.profile, d2g=lambda t: math.cos(t))  # sign error
    _, ok = replace(case, profile=wrong).self_test()
    assert not ok


def test_residual_detects_model_mismatch():
    case = build_manufactured(1, "cos")
    other = build_manufactured(1, "cos", BallParameters(alpha=1.5)).model()
    assert np.max(np.abs(case.residual(0.3, other))) > 1e-3


def test_unsupported_profile():
    with pytest.raises(ConfigError):
        make_profile("sinh")
    with pytest.raises(ConfigError):
        build_manufactured(9, "cos", modes=8)


def test_convergence_linear_regime():
    case = build_manufactured(1, "cos", LINEAR)
    rep = convergence_study(case, (50, 100, 200, 400))
    assert rep.passed
    assert all(abs(p - 2.0) < 0.05 for p in rep.orders)


def test_convergence_ball_second_order():
    rep = convergence_study(build_manufactured(1, "cos"), (100, 200, 400, 800))
    assert rep.passed, rep.rows
    E = [r["E"] for r in rep.rows]
    assert all(b < a for a, b in zip(E, E[1:]))


def test_convergence_first_order_start():
    rep = convergence_study(build_manufactured(1, "cos"), (100, 200, 400, 800), start="first")
    assert rep.passed and rep.band == (0.8, 1.2)
    assert all(abs(p - 1.0) < 0.1 for p in rep.orders)


def test_convergence_j2_exp():
    rep = convergence_study(build_manufactured(2, "exp", sigma=0.5), (100, 200, 400))
    assert rep.passed, rep.rows


def test_convergence_input_validation():
    with pytest.raises(ConfigError):
        convergence_study(build_manufactured(1, "cos"), (200, 100))


def test_metric_uses_trace_norms():
    # with the zero "exact" solution the metric must reproduce the trace norms
    case = build_manufactured(1, "cos")
    cfg = case.scheme_config(100)
    res = run(cfg)
    E, Ef = error_metric(cfg.model, res.states, cfg.tau)
    tr = res.trace
    per_k = np.sqrt(tr.beta) + np.sqrt(tr.alpha)
    assert E == pytest.approx(per_k.max(), rel=1e-14)
    assert Ef == pytest.approx(per_k[-1], rel=1e-14)


def test_perturbation_zero_eps():
    cfg = build_manufactured(1, "cos").scheme_config(100)
    rep = perturbation_study(cfg, (0.0,))
    assert rep.D == [0.0]


def test_perturbation_linear_exact():
    case = build_manufactured(1, "cos", LINEAR)
    rep = perturbation_study(case.scheme_config(200), (1e-2, 1e-3, 1e-4), seed=4)
    q = np.array(rep.quotient)
    assert np.all(np.abs(q / q[0] - 1) < 5e-4)


def test_perturbation_ball():
    rep = perturbation_study(build_manufactured(1, "cos").scheme_config(200), seed=1)
    assert rep.passed and rep.spread <= 3
    assert all(b < a for a, b in zip(rep.D, rep.D[1:]))
    assert rep.to_dict()["directions"]["phi0"]


def test_perturbation_unforced_base_and_workers():
    m = build_manufactured(1, "cos").model()
    cfg = SchemeConfig(m, 1.0, 100, np.array([0.5] + [0.0] * 7), np.zeros(8))
    a = perturbation_study(cfg, seed=2)
    b = perturbation_study(cfg, seed=2, workers=3)
    assert a.quotient == b.quotient and a.passed
