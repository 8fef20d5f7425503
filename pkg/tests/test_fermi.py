"""Statistics functions against independent oracles.

The Fermi-Dirac integral of order 1/2 is checked against adaptive
quadrature of its defining integral; the Boltzmann and order -1 cases have
closed forms. Derivatives are cross-checked by finite differences of the
implemented function so the analytic Jacobian stays consistent.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from memdrift.physics import (
    DomainError,
    StatisticsKind,
    bernoulli,
    bernoulli_prime,
    entropy_phi,
    parse_statistics,
    relative_entropy,
    stats_derivative,
    stats_eval,
    stats_inverse,
)

BOLTZ = StatisticsKind.BOLTZMANN
F12 = StatisticsKind.FERMI_DIRAC_ONE_HALF
FM1 = StatisticsKind.FERMI_DIRAC_MINUS_ONE


def f12_quadrature(eta: float) -> float:
    """2/sqrt(pi) * integral of sqrt(x)/(1 + exp(x - eta))."""

    def integrand(x):
        return math.sqrt(x) / (1.0 + math.exp(min(x - eta, 700.0)))

    pts = [abs(eta)] if eta > 0 else []
    val, _ = integrate.quad(
        integrand, 0.0, max(80.0, eta + 80.0), points=pts or None, limit=400,
        epsabs=1e-300, epsrel=1e-13,
    )
    return 2.0 / math.sqrt(math.pi) * val


@pytest.mark.parametrize(
    "eta", [-40.0, -20.0, -8.0, -3.0, -1.0, 0.0, 0.5, 2.0, 5.0, 10.0, 25.0,
            60.0, 99.0, 101.0, 150.0, 200.0]
)
def test_f12_matches_quadrature(eta):
    want = f12_quadrature(eta)
    have = stats_eval(F12, eta)
    assert abs(have - want) <= 1e-10 * abs(want)


def test_f12_dense_sweep_against_quadrature():
    rng = np.random.default_rng(90210)
    etas = np.sort(rng.uniform(-35.0, 180.0, size=60))
    have = stats_eval(F12, etas)
    for e, h in zip(etas, have):
        w = f12_quadrature(float(e))
        assert abs(h - w) <= 1e-10 * abs(w)


def test_boltzmann_is_exponential():
    etas = np.linspace(-40.0, 30.0, 141)
    np.testing.assert_allclose(stats_eval(BOLTZ, etas), np.exp(etas), rtol=1e-14)
    np.testing.assert_allclose(
        stats_derivative(BOLTZ, etas), np.exp(etas), rtol=1e-14
    )


def test_fm1_is_logistic():
    # below the saturation cap the logistic closed form holds to roundoff
    etas = np.linspace(-40.0, 29.0, 139)
    want = 1.0 / (1.0 + np.exp(-etas))
    np.testing.assert_allclose(stats_eval(FM1, etas), want, rtol=5e-13)
    # cancellation-free form of y*(1 - y)
    want_p = 0.25 / np.cosh(etas / 2.0) ** 2
    np.testing.assert_allclose(stats_derivative(FM1, etas), want_p, rtol=5e-13)


def test_fm1_saturation_cap():
    """Beyond the cap the density plateaus strictly below 1 with a
    positive derivative, keeping the trace root solves nonsingular."""
    cap_f = stats_eval(FM1, 30.0)
    for eta in (30.0, 50.0, 300.0):
        assert stats_eval(FM1, eta) == cap_f
        assert 0.0 < stats_eval(FM1, eta) < 1.0
        assert stats_derivative(FM1, eta) == stats_derivative(FM1, 30.0) > 0.0


@pytest.mark.parametrize(
    "kind,h,lo,hi",
    [(BOLTZ, 1e-6, -25.0, 20.0), (F12, 1e-6, -25.0, 25.0), (FM1, 1e-4, -14.0, 14.0)],
)
def test_derivative_consistent_with_finite_differences(kind, h, lo, hi):
    # derivative of the implemented function, not of the ideal one; the
    # step and range keep the difference quotient above its noise floor
    etas = np.linspace(lo, hi, 81)
    fd = (stats_eval(kind, etas + h) - stats_eval(kind, etas - h)) / (2 * h)
    an = stats_derivative(kind, etas)
    np.testing.assert_allclose(an, fd, rtol=1e-6, atol=1e-300)


@pytest.mark.parametrize(
    "kind,hi", [(BOLTZ, 25.0), (F12, 25.0), (FM1, 10.0)]
)
def test_inverse_round_trip(kind, hi):
    # FM1 stops where 1 - y still carries full precision
    etas = np.linspace(-30.0, hi, 111)
    y = stats_eval(kind, etas)
    back = stats_inverse(kind, y)
    np.testing.assert_allclose(back, etas, rtol=1e-12, atol=1e-11)


def test_inverse_domain_errors():
    with pytest.raises(DomainError):
        stats_inverse(F12, -1.0)
    with pytest.raises(DomainError):
        stats_inverse(FM1, 1.0)
    with pytest.raises(DomainError):
        stats_inverse(BOLTZ, 0.0)


@given(st.floats(-30.0, 30.0), st.floats(1e-6, 10.0))
@settings(max_examples=200, deadline=None)
def test_monotone_increasing(eta, step):
    # nondecreasing only: once F' * step drops under one ulp of the value,
    # equal neighbors are the correct floating point answer
    for kind in (BOLTZ, F12, FM1):
        assert stats_eval(kind, eta + step) >= stats_eval(kind, eta)


def test_strictly_increasing_on_coarse_grid():
    etas = np.arange(-30.0, 20.5, 0.5)
    for kind in (BOLTZ, F12, FM1):
        vals = stats_eval(kind, etas)
        assert np.all(np.diff(vals) > 0.0)


@given(st.floats(-40.0, 40.0))
@settings(max_examples=200, deadline=None)
def test_range_positivity(eta):
    for kind in (BOLTZ, F12, FM1):
        y = stats_eval(kind, eta)
        assert y > 0.0
    assert stats_eval(FM1, eta) < 1.0


def test_parse_statistics_aliases():
    assert parse_statistics("fermi12") is F12
    assert parse_statistics("Fermi-Dirac-1/2") is F12
    assert parse_statistics("BOLTZMANN") is BOLTZ
    assert parse_statistics("fermim1") is FM1


# --- Bernoulli function ---


def test_bernoulli_identity_grid():
    """B(-x) - B(x) = x, the flux-consistency identity."""
    x = np.linspace(-50.0, 50.0, 2001)
    lhs = bernoulli(-x) - bernoulli(x)
    assert np.max(np.abs(lhs - x)) < 1e-13


def test_bernoulli_against_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for x in [-50.0, -10.0, -1.0, -1e-3, -1e-9, 1e-12, 1e-8, 1e-4, 0.3, 2.0,
              10.0, 35.0, 50.0]:
        want = float(mp.mpf(x) / mp.expm1(mp.mpf(x)))
        assert abs(bernoulli(x) - want) <= 1e-14 * abs(want)
    assert bernoulli(0.0) == 1.0


def test_bernoulli_prime_by_finite_differences():
    xs = np.array([-30.0, -3.0, -0.1, -1e-5, 1e-5, 0.1, 3.0, 30.0])
    h = 1e-6
    fd = (bernoulli(xs + h) - bernoulli(xs - h)) / (2 * h)
    np.testing.assert_allclose(bernoulli_prime(xs), fd, rtol=2e-8, atol=1e-12)
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    want0 = float(mp.mpf(-1) / 2)
    assert abs(bernoulli_prime(0.0) - want0) < 1e-14


# --- entropy functions ---


def test_entropy_phi_boltzmann_closed_form():
    x = np.linspace(1e-8, 8.0, 200)
    want = x * np.log(x) - x + 1.0
    np.testing.assert_allclose(entropy_phi(BOLTZ, x), want, rtol=1e-12, atol=1e-14)
    assert entropy_phi(BOLTZ, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert entropy_phi(BOLTZ, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_entropy_phi_fm1_closed_form():
    y = np.linspace(1e-8, 1.0 - 1e-8, 200)
    want = y * np.log(y) + (1.0 - y) * np.log1p(-y) + math.log(2.0)
    np.testing.assert_allclose(entropy_phi(FM1, y), want, rtol=1e-10, atol=1e-13)
    assert entropy_phi(FM1, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert entropy_phi(FM1, 0.0) == pytest.approx(math.log(2.0), rel=1e-13)
    assert entropy_phi(FM1, 1.0) == pytest.approx(math.log(2.0), rel=1e-13)


def test_entropy_phi_f12_anchor_and_derivative():
    """Phi is the anti-derivative of F^{-1} anchored at x0 = F(0)."""
    x0 = stats_eval(F12, 0.0)
    assert entropy_phi(F12, x0) == pytest.approx(0.0, abs=1e-13)
    xs = np.linspace(0.05, 30.0, 40)
    h = 1e-5
    dphi = (entropy_phi(F12, xs + h) - entropy_phi(F12, xs - h)) / (2 * h)
    np.testing.assert_allclose(dphi, stats_inverse(F12, xs), rtol=2e-7, atol=1e-7)


@pytest.mark.parametrize("kind", [BOLTZ, F12, FM1])
def test_relative_entropy_is_bregman_distance(kind):
    rng = np.random.default_rng(4411)
    hi = 0.999 if kind is FM1 else 12.0
    x = rng.uniform(1e-4, hi, 50)
    y = rng.uniform(1e-4, hi, 50)
    have = relative_entropy(kind, x, y)
    # Phi(x) - Phi(y) - F^{-1}(y) (x - y), the defining combination
    want = (
        entropy_phi(kind, x)
        - entropy_phi(kind, y)
        - stats_inverse(kind, y) * (x - y)
    )
    np.testing.assert_allclose(have, want, rtol=1e-9, atol=1e-11)
    assert np.all(have >= 0.0)
    assert relative_entropy(kind, y[0], y[0]) == pytest.approx(0.0, abs=1e-14)


def test_relative_entropy_domain_errors():
    with pytest.raises(DomainError):
        relative_entropy(FM1, 0.5, 1.0)
    with pytest.raises(DomainError):
        relative_entropy(BOLTZ, -0.1, 1.0)
    with pytest.raises(DomainError):
        stats_eval(F12, float("nan"))
