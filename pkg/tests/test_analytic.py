import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mcleish import analytic_error as ae
from mcleish import awgn_reference as ref
from mcleish.errors import SizeError, ValidationError
from mcleish.modem import make_constellation
from mcleish.special import laplacian_q, mcleish_q

# mpmath quadrature of the conditional-Gaussian error rate averaged over the
# Gamma mixing density: (formula, nu, gamma, value)
ORACLE = [
    ("bpsk", 2.0, 3.0, 0.012856569583336576),
    ("mpsk4", 0.8, 5.0, 0.042130451176019289),
    ("noncoherent2", 1.5, 4.0, 0.069865675096157338),
    ("bdpsk", 0.6, 2.0, 0.068576543064702314),
    ("qam16", 2.0, 10.0, 0.19508665088639148),
    ("psk8", 1.0, 10.0, 0.088794256734967653),
]
FN = {
    "bpsk": lambda nu, g: ae.ber_bpsk(nu, g),
    "mpsk4": lambda nu, g: ae.ser_mpsk(nu, g, 4),
    "noncoherent2": lambda nu, g: ae.ser_noncoherent_orthogonal(nu, g, 2),
    "bdpsk": lambda nu, g: ae.ber_bdpsk(nu, g),
    "qam16": lambda nu, g: ae.ser_mqam_square(nu, g, 16),
    "psk8": lambda nu, g: ae.ser_mpsk(nu, g, 8),
}

nus = st.floats(0.3, 20.0)
gammas = st.floats(0.0, 100.0)


@pytest.mark.parametrize("name,nu,g,want", ORACLE)
def test_error_rates_match_oracle(name, nu, g, want):
    assert FN[name](nu, g) == pytest.approx(want, rel=1e-11)


def test_bpsk_laplacian_closed_form():
    # nu = 1: Q(sqrt(2 gamma)) of the Laplacian law
    for g in (0.5, 4.0, 20.0):
        assert ae.ber_bpsk(1.0, g) == pytest.approx(laplacian_q(math.sqrt(2 * g)), rel=1e-12)


def test_q_product_identity():
    # E[Q(a/sqrt G) Q(b/sqrt G)] against direct quadrature over the Gamma law
    from scipy import integrate, stats
    nu, a, b = 1.3, 0.7, 1.9
    f = lambda g: stats.gamma.pdf(g, nu, scale=1 / nu) * stats.norm.sf(a / math.sqrt(g)) * stats.norm.sf(b / math.sqrt(g))
    want = integrate.quad(f, 0, np.inf, limit=200, epsabs=1e-14)[0]
    assert ae.q_product(nu, a, b) == pytest.approx(want, rel=1e-9)


@given(nus, gammas)
def test_rates_are_probabilities_and_ordered(nu, g):
    vals = [ae.ber_bpsk(nu, g), ae.ber_bfsk(nu, g), ae.ser_mask(nu, g, 4), ae.ser_mpsk(nu, g, 8),
            ae.ser_mqam_square(nu, g, 16), ae.ser_noncoherent_orthogonal(nu, g, 4), ae.ser_mdpsk(nu, g, 4)]
    assert all(0.0 <= v <= 1.0 for v in vals)
    # antipodal beats orthogonal at equal energy; coherent PSK beats its differential form
    assert ae.ber_bpsk(nu, g) <= ae.ber_bfsk(nu, g) + 1e-12
    assert ae.ser_mpsk(nu, g, 4) <= ae.ser_mdpsk(nu, g, 4) + 1e-12


@given(nus, st.floats(0.0, 30.0), st.floats(0.01, 5.0))
def test_rates_decrease_with_snr(nu, g, dg):
    for f in (lambda y: ae.ser_mpsk(nu, y, 8), lambda y: ae.ser_mqam_square(nu, y, 16),
              lambda y: ae.ber_bdpsk(nu, y)):
        assert f(g + dg) <= f(g) + 1e-12


@given(nus, st.floats(0.0, 30.0))
def test_rect_equals_square(nu, g):
    assert ae.ser_mqam_rect(nu, g, 4, 4, 0.5) == pytest.approx(ae.ser_mqam_square(nu, g, 16), abs=1e-10)


@given(st.floats(0.01, 30.0), st.floats(0.05, 0.95))
def test_binary_map_optimal_in_gaussian_limit(g, p):
    # the MAP metric is the conditionally Gaussian one, so it is optimal only as nu -> inf
    assert ae.ber_binary_map(math.inf, g, (p, 1 - p), rho=-1.0) <= ae.ber_bpsk(math.inf, g) + 1e-12


def test_binary_map_metric_is_not_optimal_for_heavy_tails():
    # at nu = 0.5 the shifted Gaussian threshold loses to the prior-blind ML rule
    assert ae.ber_binary_map(0.5, 0.25, (0.25, 0.75), rho=-1.0) > ae.ber_bpsk(0.5, 0.25)


def test_noncoherent_map_uniform_and_limits():
    for M in (2, 5, 8):
        assert ae.ser_noncoherent_orthogonal_map(2.0, [3.0] * M, [1 / M] * M) == pytest.approx(
            ae.ser_noncoherent_orthogonal(2.0, 3.0, M), abs=1e-12)
    with pytest.raises(SizeError):
        ae.ser_noncoherent_orthogonal_map(1.0, [1.0] * 17, [1 / 17] * 17)


def test_noncoherent_cancellation_warning_and_stable_fallback():
    with pytest.warns(ae.CancellationWarning):
        v = ae.ser_noncoherent_orthogonal(math.inf, 1.0, 64)
    assert v == pytest.approx(ref.noncoherent_orthogonal(1.0, 64), abs=1e-10)
    with pytest.warns(ae.CancellationWarning):
        v = ae.ser_noncoherent_orthogonal(2.0, 1.0, 64)
    assert 0.5 < v < 1.0


@pytest.mark.parametrize("nu", [0.5, 2.0, 50.0])
@pytest.mark.parametrize("M", [2, 4, 8, 16])
def test_noncoherent_alternating_sum_matches_envelope_integral(nu, M):
    for g in (0.5, 3.0, 20.0):
        assert ae.ser_noncoherent_orthogonal(nu, g, M) == pytest.approx(
            ae._noncoherent_by_quadrature(nu, g, M), abs=1e-9)


def test_zero_snr_limits():
    assert ae.ser_mdpsk(1.0, 0.0, 8) == pytest.approx(7 / 8)
    assert ae.ber_bdpsk(1.0, 0.0) == pytest.approx(0.5)
    assert ae.ser_noncoherent_orthogonal(1.0, 0.0, 4) == pytest.approx(0.75)


def test_gaussian_limit_against_awgn_reference():
    for g in (1.0, 4.0, 10.0):
        assert ae.ser_mpsk(math.inf, g, 8) == pytest.approx(ref.mpsk(g, 8), abs=1e-12)
        assert ae.ser_mdpsk(math.inf, g, 4) == pytest.approx(ref.mdpsk(g, 4), abs=1e-12)
        assert ae.ser_noncoherent_orthogonal(math.inf, g, 4) == pytest.approx(
            ref.noncoherent_orthogonal(g, 4), abs=1e-12)


def test_union_bound_dominates_exact_rate():
    c = make_constellation("MQAM_SQUARE", 16)
    for g in (3.0, 10.0, 30.0):
        full, simple = ae.union_bound(c, 1.0, 1.0, 1.0 / g)
        exact = ae.ser_mqam_square(1.0, g, 16)
        assert full >= exact - 1e-12 and simple >= full - 1e-12


def test_error_rate_dispatch():
    q = ae.ErrorRateQuery("MPSK", 8, 1.0, 5.0)
    assert ae.error_rate(q) == pytest.approx(ae.ser_mpsk(1.0, 5.0, 8))
    with pytest.raises(ValidationError):
        ae.ser_mask(1.0, 1.0, 1)
    with pytest.raises(ValidationError):
        ae.ser_mqam_square(1.0, 1.0, 8)


def test_gaussian_q_consistency_at_large_nu():
    assert ae.ber_bpsk(1e6, 4.0) == pytest.approx(ref.bpsk(4.0), rel=1e-5)
    assert mcleish_q(math.inf, 2.0) == pytest.approx(ref.bpsk(2.0), rel=1e-14)
