"""Frozen-oracle and dual-route checks for the scalar asymptotics.

The frozen constants below were validated against independent routes before
freezing: closed forms where they exist, adaptive quadrature
(scipy.integrate.quad) for the expectations, and Monte Carlo.
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from orthospec import (
    DegeneratePredictionError,
    InvalidParameterError,
    delta_threshold,
    lambda_of_mu,
    make_function,
    mu_bar,
    mu_hat,
    predict,
    psi,
    rho_star_curve,
    star_optimal,
)
from orthospec.asymptotics import exp_expectation, exp_expectation_mc
from orthospec.core import make_rng


# -- quadrature primitive ---------------------------------------------------

def test_exp_expectation_polynomials_exact():
    assert np.isclose(exp_expectation(lambda s: np.ones_like(s)), 1.0, atol=1e-12)
    assert np.isclose(exp_expectation(lambda s: s), 1.0, atol=1e-12)
    assert np.isclose(exp_expectation(lambda s: s**2), 2.0, atol=1e-11)


def test_exp_expectation_rational_against_exp1():
    # E[1/(1+s)] = e * E1(1), an independent closed form
    val = exp_expectation(lambda s: 1.0 / (1.0 + s))
    assert np.isclose(val, math.e * special.exp1(1.0), atol=1e-12)


def test_exp_expectation_with_jump_is_exact():
    # E[1{s > c}] = exp(-c); without the split the rule would miss the edge
    val = exp_expectation(lambda s: (s > 1.5).astype(float), jumps=(1.5,))
    assert np.isclose(val, math.exp(-1.5), atol=1e-12)


def test_psi_against_adaptive_quadrature():
    star = make_function("star")
    delta, mu = 3.0, 0.6
    nu = 1.0 / mu

    def g(s):
        return 1.0 / (nu - (1.0 - 1.0 / s))

    e_g = integrate.quad(lambda s: g(s) * np.exp(-s), 0, np.inf)[0]
    e_sg = integrate.quad(lambda s: s * g(s) * np.exp(-s), 0, np.inf)[0]
    e_g2 = integrate.quad(lambda s: g(s) ** 2 * np.exp(-s), 0, np.inf)[0]
    p = psi(star, mu, delta)
    assert np.isclose(p.psi1, e_sg / e_g, atol=1e-9)
    assert np.isclose(p.psi2, e_g2 / e_g**2, atol=1e-9)


def test_psi_discontinuous_against_adaptive_quadrature():
    trim = make_function("trim")  # cut at s = 4
    delta, mu = 3.0, 0.6
    nu = 1.0 / mu

    def g(s):
        t = (s / 4.0) * (s < 4.0)
        return 1.0 / (nu - t)

    def split_quad(fn):
        lo = integrate.quad(fn, 0, 4.0)[0]
        hi = integrate.quad(fn, 4.0, np.inf)[0]
        return lo + hi

    e_g = split_quad(lambda s: g(s) * np.exp(-s))
    e_sg = split_quad(lambda s: s * g(s) * np.exp(-s))
    p = psi(trim, mu, delta)
    assert np.isclose(p.psi1, e_sg / e_g, atol=1e-9)
    assert np.isclose(p.e_g, e_g, atol=1e-10)


def test_psi_against_monte_carlo():
    star = make_function("star")
    p = psi(star, 0.6, 3.0)
    rng = make_rng(77, "psi mc")
    nu = 1.0 / 0.6
    mean, se = exp_expectation_mc(lambda s: 1.0 / (nu - star.t_of_s(s)), rng)
    assert abs(mean - p.e_g) <= 4.0 * se


# -- frozen oracles for the headline predictions ----------------------------

def test_star_delta3_frozen():
    p = predict(make_function("star"), 3.0)
    assert p.positive_phase
    assert np.isclose(p.mu_bar, 0.745804921131, atol=1e-8)
    assert np.isclose(p.mu_hat, 0.530766486047, atol=1e-8)
    assert np.isclose(p.rho_sq, 0.570096158952, atol=1e-8)
    assert np.isclose(p.theta_sq, 0.884067713935, atol=1e-8)


def test_star_outlier_sits_at_one_over_delta():
    # the optimal map parks the outlier exactly at 1/delta
    for d in (2.5, 3.0, 4.0, 5.0):
        p = predict(make_function("star"), d)
        assert np.isclose(p.lambda1, 1.0 / d, atol=1e-9)


def test_star_closed_form_identity():
    # general formula vs the closed form, and the frozen curve values
    frozen = {2.5: 0.372676302119, 3.0: 0.570096158952,
              4.0: 0.755487599751, 5.0: 0.837777008341}
    for d, rho in frozen.items():
        general = predict(make_function("star"), d).rho_sq
        closed, _, _ = star_optimal(d)
        assert np.isclose(general, closed, atol=1e-8)
        assert np.isclose(general, rho, atol=1e-8)


def test_star_below_weak_threshold():
    p = predict(make_function("star"), 1.9)
    assert not p.positive_phase and p.rho_sq == 0.0
    assert predict(make_function("star"), 2.1).rho_sq > 0.0
    r = rho_star_curve(np.array([1.5, 2.0, 3.0]))
    assert r[0] == 0.0 and r[1] == 0.0 and r[2] > 0.5


def test_alt_weak_closed_form():
    f = make_function("alt_weak")
    for d in (3.0, 4.0, 6.0):
        p = predict(f, d)
        assert np.isclose(p.mu_hat, 1.0, atol=1e-6)
        assert np.isclose(p.rho_sq, (d * d - 2 * d) / (d * d - 2), atol=1e-6)


def test_mm_delta5_frozen():
    p = predict(make_function("mm"), 5.0)
    assert np.isclose(p.mu_hat, 0.656901903640, atol=1e-8)
    assert np.isclose(p.lambda1, 0.257743770273, atol=1e-8)
    assert np.isclose(p.rho_sq, 0.734293156713, atol=1e-8)


def test_shifted_mm_min_branch_frozen():
    f = make_function("shifted_mm")
    mh = mu_hat(f, 5.0, branch="min")
    assert mh.found and mh.mu > 1.0
    assert np.isclose(mh.mu, 2.577661268967, atol=1e-7)
    assert np.isclose(lambda_of_mu(f, mh.mu, 5.0), 0.719938040123, atol=1e-8)


def test_min_branch_requires_bounded_below():
    with pytest.raises(DegeneratePredictionError):
        mu_hat(make_function("star"), 3.0, branch="min")


# -- thresholds -------------------------------------------------------------

def test_thresholds_frozen_and_dual_route():
    cases = {
        "trim": (make_function("trim"), 3.61961161),
        "subset15": (make_function("subset"), 2.54742239),
        "subset2": (make_function("subset", c1=2.0), 2.59725324),
    }
    for f, frozen in cases.values():
        dt = delta_threshold(f)
        assert dt.found
        assert np.isclose(dt.delta_T, frozen, atol=2e-4)
        # crossing-point route must agree with the bisection route
        assert dt.delta_T_fixed_point is not None
        assert abs(dt.delta_T - dt.delta_T_fixed_point) < 1e-3


def test_mm_threshold_closed_form():
    # psi1 at the branch endpoint nu=1 is 1 + 1/sqrt(delta); setting it equal
    # to delta/(delta-1) gives delta^2 - 3 delta + 1 = 0
    dt = delta_threshold(make_function("mm"))
    assert np.isclose(dt.delta_T, (3.0 + math.sqrt(5.0)) / 2.0, atol=2e-4)


def test_star_threshold_at_two():
    dt = delta_threshold(make_function("star"))
    assert np.isclose(dt.delta_T, 2.0, atol=1e-3)


def test_below_threshold_prediction_is_zero():
    assert predict(make_function("mm"), 2.5).rho_sq == 0.0
    assert predict(make_function("subset"), 2.5).rho_sq == 0.0


# -- solver structure -------------------------------------------------------

def test_mu_bar_interior_flags():
    assert mu_bar(make_function("trim"), 3.0).interior  # psi2 diverges near 1
    mb = mu_bar(make_function("mm"), 2.5)
    assert not mb.interior and mb.mu == 1.0


def test_mu_hat_respects_mu_bar():
    for kind in ("trim", "subset", "star", "star_regularized"):
        f = make_function(kind)
        mh = mu_hat(f, 4.0)
        if mh.found:
            assert mh.mu <= mh.mu_bar + 1e-9
            p = psi(f, mh.mu, 4.0)
            assert np.isclose(p.psi1, 4.0 / 3.0, atol=1e-7)


def test_rho_between_zero_and_one():
    for kind in ("trim", "subset", "mm", "star", "star_regularized", "alt_weak"):
        for d in (2.2, 3.0, 4.5, 6.0):
            p = predict(make_function(kind), d)
            assert 0.0 <= p.rho_sq <= 1.0
            assert p.rho_sq == 0.0 or p.positive_phase


def test_psi_rejects_mu_outside_branch():
    with pytest.raises(InvalidParameterError):
        psi(make_function("star"), 1.5, 3.0)  # nu < 1 hits the pole region
