import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mcleish.channel import ChannelConfig, precoder_from_covariance, transmit
from mcleish.errors import DomainError, ValidationError
from mcleish.modem import (
    Family,
    detect_dpsk,
    detect_map_coherent,
    detect_map_noncoherent,
    detect_ml_coherent,
    detect_ml_correlated,
    detect_ml_noncoherent,
    make_constellation,
)

ALL = [
    ("BPSK", None), ("BFSK", None), ("OOK", None), ("MASK", 8), ("MQAM_SQUARE", 16),
    ("MPSK", 8), ("NONCOH_ORTHOGONAL", 4), ("MDPSK", 4),
]


@pytest.mark.parametrize("fam,M", ALL)
def test_average_energy(fam, M):
    c = make_constellation(fam, M, E_S=2.5)
    assert c.avg_energy == pytest.approx(2.5, rel=1e-12)
    assert not c.symbols.flags.writeable


def test_rect_qam_spacing_and_energy():
    c = make_constellation("MQAM_RECT", M_I=4, M_Q=2, E_S=1.0)
    assert c.M == 8 and c.avg_energy == pytest.approx(1.0)
    # default kappa gives equal spacing on both rails
    assert c.meta["delta_I"] == pytest.approx(c.meta["delta_Q"])
    k = make_constellation("MQAM_RECT", M_I=4, M_Q=2, kappa=0.3)
    assert np.mean(k.symbols.imag ** 2) == pytest.approx(0.3)


def test_family_parse_aliases():
    assert Family.parse("bpsk") is Family.BPSK
    assert Family.parse(Family.MPSK) is Family.MPSK
    with pytest.raises(ValidationError):
        Family.parse("qpsk-ish")


def test_constellation_validation():
    with pytest.raises(ValidationError):
        make_constellation("BPSK", 4)
    with pytest.raises(ValidationError):
        make_constellation("MASK", 1)
    with pytest.raises(DomainError):
        make_constellation("MPSK", 4, E_S=0.0)
    with pytest.raises(ValidationError):
        make_constellation("MPSK", 4, priors=[0.5, 0.5, 0.5, 0.5])


@pytest.mark.parametrize("fam,M", ALL[:6])
def test_coherent_detectors_noise_free(fam, M):
    c = make_constellation(fam, M, E_S=1.0)
    for H in (1.0, 0.4):
        d = detect_ml_coherent(c, H, H * c.symbols)
        assert np.array_equal(d.index, np.arange(c.M))
        d = detect_map_coherent(c, H, H * c.symbols, 0.1)
        assert np.array_equal(d.index, np.arange(c.M))


def test_ml_shortcut_matches_distance_for_equal_energy():
    c = make_constellation("MPSK", 8)
    r = np.random.default_rng(0).standard_normal((2000, 1)) * (1 + 1j)
    a = detect_ml_coherent(c, 1.0, r).index
    b = detect_ml_coherent(c, 1.0, r, shortcut=True).index
    assert np.array_equal(a, b)
    with pytest.raises(ValidationError):
        detect_ml_coherent(make_constellation("MASK", 4), 1.0, r, shortcut=True)


def test_map_uniform_equals_ml():
    c = make_constellation("MQAM_SQUARE", 16)
    rng = np.random.default_rng(1)
    r = (rng.standard_normal((5000, 1)) + 1j * rng.standard_normal((5000, 1))) * 0.8
    assert np.array_equal(detect_map_coherent(c, 1.0, r, 0.3).index, detect_ml_coherent(c, 1.0, r).index)


def test_map_prior_shifts_threshold():
    c = make_constellation("BPSK", priors=[0.9, 0.1])
    # threshold moves to  N0 ln(p1/p0) / (4 sqrt(E))  towards the unlikely point
    t = 1.0 * math.log(0.1 / 0.9) / 4.0
    assert detect_map_coherent(c, 1.0, np.array([t + 1e-6]), 1.0).index == 0
    assert detect_map_coherent(c, 1.0, np.array([t - 1e-6]), 1.0).index == 1


def test_single_vs_batch_decision_types():
    c = make_constellation("BPSK")
    d = detect_ml_coherent(c, 1.0, np.array([0.3]))
    assert isinstance(d.index, int) and isinstance(d.metric, float)
    d = detect_ml_coherent(c, 1.0, np.array([[0.3], [-0.2]]))
    assert d.index.tolist() == [0, 1]


def test_noncoherent_detection_ignores_phase():
    c = make_constellation("NONCOH_ORTHOGONAL", 4)
    r = c.symbols * np.exp(1j * np.array([0.3, 2.0, -1.0, 3.0]))[:, None]
    assert np.array_equal(detect_ml_noncoherent(c, 1.0, r).index, np.arange(4))
    assert np.array_equal(detect_map_noncoherent(c, 1.0, r).index, np.arange(4))
    d = detect_ml_noncoherent(c, 1.0, np.zeros(4))
    assert d.degenerate


def test_ook_noncoherent_uses_energy_weighting():
    c = make_constellation("OOK")
    assert detect_ml_noncoherent(c, 1.0, np.array([3.0j])).index == 1


def test_dpsk_transitions():
    c = make_constellation("MDPSK", 4)
    s = c.meta["carrier"]
    ph = np.exp(0.7j)
    r1 = np.tile(s, (4, 1)) * ph
    r2 = r1 * np.exp(1j * c.phases)[:, None]
    assert np.array_equal(detect_dpsk(c, r1, r2).index, np.arange(4))
    assert detect_dpsk(c, np.zeros(1), np.ones(1)).degenerate
    with pytest.raises(ValidationError):
        detect_dpsk(make_constellation("MPSK", 4), r1, r2)


def test_dimension_spreading_preserves_geometry():
    base = make_constellation("MQAM_SQUARE", 16)
    c = make_constellation("MQAM_SQUARE", 16, L=5)
    assert c.L == 5
    g0 = base.symbols @ base.symbols.conj().T
    g1 = c.symbols @ c.symbols.conj().T
    assert np.allclose(g0, g1, atol=1e-12)
    dp = make_constellation("MDPSK", 4, L=3)
    assert np.linalg.norm(dp.meta["carrier"]) == pytest.approx(1.0)


@given(st.integers(0, 2 ** 31))
def test_correlated_oracle_matches_equalize_then_ml(seed):
    rng = np.random.default_rng(seed)
    L = 3
    A = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
    S = A @ A.conj().T / L + 0.2 * np.eye(L)
    c = make_constellation("MPSK", 8, L=L)
    F = precoder_from_covariance(S)
    cfg = ChannelConfig(S, 1.0, H=1.3, Theta=0.4)
    r = transmit(cfg, F, c.symbols[rng.integers(0, 8, 200)], rng)
    eq = np.exp(-0.4j) * np.linalg.solve(F, r.T).T
    a = detect_ml_correlated(c, 1.3, 0.4, F, S, r).index
    b = detect_ml_coherent(c, 1.3, eq).index
    assert np.array_equal(a, b)
