import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from canon import P_STAR
from jumpou.model import log_mgf_xt
from jumpou.psi import log_psi_mod
from jumpou.quad import (
    IntegralResult,
    QuadConfig,
    integrate_semi_infinite,
    integrate_singular,
    laplace_time_integral,
    truncation_distance,
)
from oracles import laplace_direct, midpoint_mapped


def within_tolerance(res: IntegralResult, cfg: QuadConfig) -> bool:
    return res.abs_error_estimate <= max(cfg.abs_tol, cfg.rel_tol * abs(res.value))


# ----------------------------------------------------------- config


def test_config_defaults_and_round_trip():
    cfg = QuadConfig()
    assert (cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions) == (1e-10, 1e-9, 200)
    assert QuadConfig.from_dict(cfg.to_dict()) == cfg
    assert QuadConfig.from_dict({}) == cfg
    assert QuadConfig.from_dict({"rel_tol": 1e-11}).rel_tol == 1e-11


@pytest.mark.parametrize("bad", [{"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_subdivisions": 5},
                                 {"gaussian_truncation_z": 0.0}])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        QuadConfig(**bad)


def test_config_unknown_key():
    with pytest.raises(ValueError, match="unknown"):
        QuadConfig.from_dict({"tol": 1e-3})


def test_tightened():
    t = QuadConfig().tightened(100.0)
    assert t.abs_tol == pytest.approx(1e-12) and t.rel_tol == pytest.approx(1e-11)
    assert t.max_subdivisions == 400


# --------------------------------------------------------- singular


def test_inverse_sqrt():
    res = integrate_singular(lambda z: 1.0 / np.sqrt(z), 0.0, 1.0, -0.5, 0.0)
    assert res.converged
    assert res.value == pytest.approx(2.0, abs=1e-10)


def test_constant():
    res = integrate_singular(lambda z: np.ones_like(z), 0.0, 1.0)
    assert res.value == pytest.approx(1.0, abs=1e-14)


def test_both_ends_singular():
    # int_0^1 z^-0.7 (1-z)^-0.4 dz = B(0.3, 0.6)
    res = integrate_singular(lambda z, a, b: a**-0.7 * b**-0.4, 0.0, 1.0, -0.7, -0.4, offsets=True)
    assert res.converged
    assert res.value == pytest.approx(special.beta(0.3, 0.6), rel=1e-10)


def test_beta_type_integrand_against_brute_force():
    # int_0^theta z^{q/kappa - 1} (theta - z)^{0.3} dz with q=0.5, kappa=1, theta=2
    th, g_lo, g_hi = 2.0, -0.5, 0.3
    res = integrate_singular(lambda z, a, b: a**g_lo * b**g_hi, 0.0, th, g_lo, 0.0, offsets=True)

    def logf(z, d):
        return g_lo * np.log(d) + g_hi * np.log(th - z), np.ones_like(z)

    brute = midpoint_mapped(logf, 0.0, th, g_lo)
    assert res.value == pytest.approx(brute, rel=1e-6)
    exact = th ** (g_lo + g_hi + 1) * special.beta(g_lo + 1, g_hi + 1)
    assert res.value == pytest.approx(exact, rel=1e-10)


def test_log_form_survives_extreme_scale():
    # exp(-800) * z^2 on (0, 1): plain evaluation underflows to 0
    res = integrate_singular(lambda z: (-800.0 + 2 * np.log(z), np.ones_like(z)), 0.0, 1.0, log_form=True)
    assert res.converged
    assert res.value == 0.0  # exp(-800) / 3 underflows a double
    res = integrate_singular(lambda z: (700.0 + 2 * np.log(z), np.ones_like(z)), 0.0, 1.0, log_form=True)
    assert res.value == pytest.approx(math.exp(700) / 3, rel=1e-10)


def test_signed_log_form():
    res = integrate_singular(lambda z: (np.log(np.abs(z - 0.25)), np.sign(z - 0.25)), 0.0, 1.0, log_form=True)
    assert res.value == pytest.approx(0.5 - 0.25, abs=1e-12)


def test_non_convergence_is_flagged():
    cfg = QuadConfig(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=10)
    res = integrate_singular(lambda z: np.abs(np.sin(300 * z)), 0.0, 1.0, cfg=cfg)
    assert not res.converged


def test_rejects_empty_interval():
    with pytest.raises(ValueError):
        integrate_singular(lambda z: z, 1.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 2.0), st.floats(-0.9, 2.0), st.floats(0.1, 5.0))
def test_converged_implies_error_bound(g_lo, g_hi, length):
    cfg = QuadConfig()
    res = integrate_singular(lambda z, a, b: a**g_lo * b**g_hi * np.cos(z), 0.0, length, g_lo, g_hi, cfg,
                             offsets=True)
    if res.converged:
        assert within_tolerance(res, cfg)


coef = st.floats(-3, 3)


@settings(max_examples=40, deadline=None)
@given(coef, coef, coef, coef, st.floats(-0.8, 1.0))
def test_linearity(a, b, c1, c2, gamma):
    cfg = QuadConfig()

    def f(z):
        return z**gamma * np.exp(c1 * z)

    def g(z):
        return z**gamma * np.cos(c2 * z)

    lhs = integrate_singular(lambda z: a * f(z) + b * g(z), 0.0, 1.0, gamma, 0.0, cfg).value
    rhs = a * integrate_singular(f, 0.0, 1.0, gamma, 0.0, cfg).value + b * integrate_singular(
        g, 0.0, 1.0, gamma, 0.0, cfg).value
    scale = max(1.0, abs(a) + abs(b)) * max(1.0, abs(lhs))
    assert abs(lhs - rhs) <= 2 * cfg.abs_tol + 2 * cfg.rel_tol * scale


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.8, 1.0), st.floats(-4, 4), st.floats(0.5, 20))
def test_tightening_stays_within_error_estimate(gamma, c, freq):
    loose = QuadConfig(abs_tol=1e-6, rel_tol=1e-6)

    def f(z):
        return z**gamma * np.exp(c * z) * np.cos(freq * z)

    a = integrate_singular(f, 0.0, 1.0, gamma, 0.0, loose)
    b = integrate_singular(f, 0.0, 1.0, gamma, 0.0, loose.tightened(1e4))
    if a.converged:
        assert abs(a.value - b.value) <= a.abs_error_estimate + b.abs_error_estimate


# ------------------------------------------------------ semi-infinite


def test_half_gaussian():
    res = integrate_semi_infinite(lambda z: np.exp(-z * z), 0.0, 1, (1.0, 0.0))
    assert res.converged
    assert res.value == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-10)


def test_half_gaussian_mirror():
    a = integrate_semi_infinite(lambda z: np.exp(-z * z), 0.0, 1, (1.0, 0.0)).value
    b = integrate_semi_infinite(lambda z: np.exp(-z * z), 0.0, -1, (1.0, 0.0)).value
    assert a == pytest.approx(b, abs=1e-12)


def test_shifted_gaussian_with_singular_start():
    # int_1^inf (z-1)^-0.5 exp(-(z-3)^2) dz against scipy's algebraic-weight rule
    f = lambda z, d, _h: d**-0.5 * np.exp(-(z - 3) ** 2)  # noqa: E731
    res = integrate_semi_infinite(f, 1.0, 1, (1.0, 6.0), -0.5, offsets=True)
    ref, _ = integrate.quad(lambda z: np.exp(-(z - 3) ** 2), 1.0, 12.0, weight="alg", wvar=(-0.5, 0.0),
                            epsabs=1e-14, epsrel=1e-13)
    assert res.value == pytest.approx(ref, rel=1e-10)


def test_gamma2_integrand_self_consistent():
    # F_2 integrand at r=1, x_hat=0; tolerance 1e-9 against 1e-11
    th = P_STAR.theta_down
    a2 = P_STAR.sigma**2 / (4 * P_STAR.kappa)
    gamma = P_STAR.lam * (1 - P_STAR.p_up) / P_STAR.kappa

    def f(z, d, _h):
        return log_psi_mod(P_STAR, 1.0, z, abs_ztheta=d), np.ones_like(z)

    kw = dict(log_form=True, offsets=True)
    a = integrate_semi_infinite(f, th, 1, (a2, 0.0), gamma, QuadConfig(rel_tol=1e-9), **kw)
    b = integrate_semi_infinite(f, th, 1, (a2, 0.0), gamma, QuadConfig(rel_tol=1e-11, abs_tol=1e-13), **kw)
    assert a.converged and b.converged
    assert a.value == pytest.approx(b.value, rel=1e-8)


def test_truncation_distance_root():
    a2, b1, lr = 0.5, 1.0, math.log(1e-13)
    t = truncation_distance(a2, b1, lr)
    peak = b1**2 / (4 * a2)
    assert -a2 * t * t + b1 * t - peak == pytest.approx(lr, rel=1e-12)


def test_semi_infinite_rejects_bad_input():
    with pytest.raises(ValueError):
        integrate_semi_infinite(lambda z: z, 0.0, 0, (1.0, 0.0))
    with pytest.raises(ValueError):
        integrate_semi_infinite(lambda z: z, 0.0, 1, (0.0, 0.0))


# ------------------------------------------------------------ Laplace


@pytest.mark.parametrize("s", [0.1, 1.0, 7.0])
def test_laplace_of_one(s):
    assert laplace_time_integral(lambda t: np.ones_like(t), s, 1.0).value == pytest.approx(1.0, abs=1e-12)


def test_laplace_of_exponential():
    res = laplace_time_integral(lambda t: np.exp(-2.0 * t), 1.0, P_STAR)
    assert res.value == pytest.approx(1 / 3, abs=1e-10)


def test_laplace_of_mgf_against_direct_integration():
    g = lambda t: np.exp(log_mgf_xt(P_STAR, 0.5, 1.0, t))  # noqa: E731
    res = laplace_time_integral(g, 1.0, P_STAR)
    assert res.value == pytest.approx(laplace_direct(lambda t: float(g(t)), 1.0, 80.0), abs=1e-8)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.integers(1, 4), st.floats(0.3, 3.0))
def test_laplace_polynomial_in_u_is_exact(coeffs, ratio, kappa):
    # With s/kappa an integer the mapped integrand is a polynomial in u, which
    # Gauss-Kronrod integrates exactly: s int e^{-st} sum c_j u^j dt = sum c_j s / (s + j kappa).
    s = ratio * kappa
    poly = lambda u: sum(c * u**j for j, c in enumerate(coeffs))  # noqa: E731
    res = laplace_time_integral(poly, s, kappa, in_u=True)
    exact = sum(c * s / (s + j * kappa) for j, c in enumerate(coeffs))
    assert res.value == pytest.approx(exact, rel=1e-13, abs=1e-14)


def test_laplace_rejects_nonpositive_rate():
    with pytest.raises(ValueError):
        laplace_time_integral(lambda t: t, 0.0, 1.0)
