import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sps
from scipy import stats

from mcleish.errors import DomainError
from mcleish.special import (
    bessel_k,
    gamma_exp_mean,
    gaussian_q,
    gaussian_q_bivariate,
    laplacian_q,
    log_bessel_k,
    mcleish_q,
    mcleish_q_bivariate,
    mcleish_q_bounds,
    mcleish_q_bounds_raw,
    mcleish_q_multivariate,
    mcleish_q_partial,
)

# Frozen from 30-digit mpmath quadrature of E[Q(x / sqrt(G))] over the
# Gamma(nu, 1/nu) density (independent of the Bessel-function route).
Q_ORACLE = [
    (0.5, 0.7, 0.15508005026320146),
    (1.7, 1.3, 0.084180989246489122),
    (3.0, 2.5, 0.010420084401307171),
    (0.25, 4.0, 0.0050629534194832488),
    (8.0, -0.6, 0.73415974347176772),
]
# (1/pi) int_0^phi E[exp(-x^2 / (2 G sin^2 t))] dt, mpmath
QP_ORACLE = [
    (1.5, 1.0, 2.0, 0.19381077630453177),
    (0.7, 0.5, 0.75 * math.pi, 0.38489603108187201),
]
# E[Q2(x/sqrt G, y/sqrt G; rho)], mpmath
Q2_ORACLE = [
    (1.2, 0.5, 0.8, 0.4, 0.0873049195692043),
    (3.0, 0.0, 0.0, -0.5, 1.0 / 6.0),
]

nus = st.floats(0.2, 30.0)
xs = st.floats(-8.0, 8.0)


@pytest.mark.parametrize("nu,x,want", Q_ORACLE)
def test_q_matches_mixture_oracle(nu, x, want):
    assert mcleish_q(nu, x) == pytest.approx(want, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("nu,x,phi,want", QP_ORACLE)
def test_partial_q_matches_oracle(nu, x, phi, want):
    assert mcleish_q_partial(nu, x, phi) == pytest.approx(want, rel=1e-11)


@pytest.mark.parametrize("nu,x,y,rho,want", Q2_ORACLE)
def test_bivariate_q_matches_oracle(nu, x, y, rho, want):
    assert mcleish_q_bivariate(nu, x, y, rho) == pytest.approx(want, abs=1e-10)


def test_laplacian_q_closed_form():
    assert laplacian_q(1.0) == pytest.approx(0.5 * math.exp(-math.sqrt(2.0)), rel=1e-15)
    assert laplacian_q(-1.0) == pytest.approx(1 - 0.5 * math.exp(-math.sqrt(2.0)), rel=1e-15)
    assert laplacian_q(0.0) == 0.5


def test_gaussian_q_matches_normal_sf():
    x = np.linspace(-6, 6, 25)
    assert np.allclose([gaussian_q(v) for v in x], stats.norm.sf(x), rtol=1e-14)


def test_q_gaussian_limit_at_inf():
    assert mcleish_q(math.inf, 1.3) == pytest.approx(gaussian_q(1.3), rel=1e-14)


@given(nus, xs)
def test_q_symmetry(nu, x):
    assert mcleish_q(nu, x) + mcleish_q(nu, -x) == pytest.approx(1.0, abs=1e-12)


@given(nus, st.floats(0.0, 6.0), st.floats(0.01, 2.0))
def test_q_monotone_decreasing(nu, x, dx):
    assert mcleish_q(nu, x + dx) <= mcleish_q(nu, x) + 1e-14


@given(nus, st.floats(0.05, 6.0))
def test_bounds_sandwich(nu, x):
    lo, up = mcleish_q_bounds(nu, x)
    q = mcleish_q(nu, x)
    assert lo - 1e-13 <= q <= up + 1e-13
    rlo, rup = mcleish_q_bounds_raw(nu, x)
    assert rup >= up and rlo <= lo + 1e-15


@given(nus, st.floats(0.0, 5.0))
def test_partial_q_full_angle_is_twice_q_half_plane(nu, x):
    # phi = pi/2 covers half of the angular range of the tail integral
    assert mcleish_q_partial(nu, x, 0.5 * math.pi) == pytest.approx(mcleish_q(nu, x), abs=1e-11)
    assert mcleish_q_partial(nu, x, math.pi) == pytest.approx(2 * mcleish_q(nu, x), abs=1e-11)


@given(nus, st.floats(-3, 3), st.floats(-3, 3))
def test_bivariate_q_at_zero_correlation_factorises_only_for_gaussian(nu, x, y):
    # zero correlation does not give independence, but the Gaussian limit does
    g = gaussian_q_bivariate(x, y, 0.0)
    assert g == pytest.approx(gaussian_q(x) * gaussian_q(y), abs=1e-12)
    assert mcleish_q_bivariate(nu, x, y, 0.0) >= 0.0


def test_bivariate_q_gaussian_orthant_identity():
    # Pr{X > 0, Y > 0} = 1/4 + asin(rho) / (2 pi) is scale free
    for rho in (-0.9, -0.3, 0.0, 0.5, 0.95):
        want = 0.25 + math.asin(rho) / (2 * math.pi)
        assert mcleish_q_bivariate(0.7, 0.0, 0.0, rho) == pytest.approx(want, abs=1e-10)


def test_multivariate_q_reduces_to_q_and_bivariate():
    assert mcleish_q_multivariate(2.0, [0.8]) == pytest.approx(mcleish_q(2.0, 0.8), abs=1e-12)
    assert mcleish_q_multivariate(2.0, [0.8, -0.4]) == pytest.approx(
        mcleish_q_bivariate(2.0, 0.8, -0.4, 0.0), abs=1e-9)


def test_gamma_exp_mean_closed_form():
    for nu, a in ((0.5, 0.3), (2.0, 1.7), (7.0, 0.01)):
        z = 2 * math.sqrt(a * nu)
        want = 2 / math.gamma(nu) * (a * nu) ** (nu / 2) * sps.kv(nu, z)
        assert gamma_exp_mean(nu, a) == pytest.approx(want, rel=1e-12)
    assert gamma_exp_mean(3.0, 0.0) == 1.0


def test_bessel_wrappers_match_scipy():
    for v, x in ((0.5, 0.1), (2.3, 5.0), (10.0, 30.0)):
        assert bessel_k(v, x) == pytest.approx(sps.kv(v, x), rel=1e-13)
        assert log_bessel_k(v, x) == pytest.approx(math.log(sps.kve(v, x)) - x, rel=1e-13)
    # deep argument where kv underflows
    assert log_bessel_k(1.0, 2000.0) == pytest.approx(math.log(sps.kve(1.0, 2000.0)) - 2000.0, rel=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_q_rejects_bad_normality(bad):
    with pytest.raises(DomainError):
        mcleish_q(bad, 1.0)


def test_partial_q_rejects_angle_out_of_range():
    with pytest.raises(DomainError):
        mcleish_q_partial(1.0, 1.0, 4.0)
