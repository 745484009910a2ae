import math

import numpy as np
import pytest

from mcleish.channel import (
    ChannelConfig,
    equalize_coherent,
    equalize_noncoherent,
    precoder_from_covariance,
    transmit,
    white_noise,
)
from mcleish.errors import DomainError, ValidationError


def _sigma(L, seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((L, L)) + 1j * r.standard_normal((L, L))
    return A @ A.conj().T / L + 0.2 * np.eye(L)


def test_precoder_identity_for_white_covariance():
    assert np.allclose(precoder_from_covariance(0.5 * 3.0 * np.eye(4)), np.eye(4))
    d = np.diag([1.0, 2.0, 3.0])
    n0 = 2 * 6.0 / 3
    assert np.allclose(precoder_from_covariance(d), np.diag(np.sqrt(2 * np.diag(d) / n0)))


def test_white_config_recovers_n0():
    cfg = ChannelConfig.white(3, 1.5, N0=2.5)
    assert cfg.N0 == pytest.approx(2.5)
    assert np.allclose(cfg.Sigma, 1.25 * np.eye(3))


def test_equalized_noise_is_white_with_n0():
    S = _sigma(3, 1)
    cfg = ChannelConfig(S, 2.0)
    F = precoder_from_covariance(S)
    # F^-1 Sigma F^-H = (N0 / 2) I
    Fi = np.linalg.inv(F)
    assert np.allclose(Fi @ S @ Fi.conj().T, 0.5 * cfg.N0 * np.eye(3), atol=1e-12)
    r = transmit(cfg, F, np.zeros((300_000, 3)), 5)
    z = equalize_coherent(cfg, F, r)
    emp = z.T @ z.conj() / z.shape[0]
    assert np.allclose(emp, cfg.N0 * np.eye(3), atol=0.03 * cfg.N0)


def test_noiseless_round_trip_recovers_symbols():
    S = _sigma(4, 2)
    cfg = ChannelConfig(S, 1.0, H=0.7, Theta=1.1, noiseless=True)
    F = precoder_from_covariance(S)
    s = np.exp(1j * np.arange(8).reshape(2, 4))
    r = transmit(cfg, F, s, 0)
    assert np.allclose(equalize_coherent(cfg, F, r), 0.7 * s)
    assert np.allclose(equalize_noncoherent(cfg, F, r), 0.7 * np.exp(1.1j) * s)
    one = transmit(cfg, F, s[0], 0)
    assert one.shape == (4,)


def test_transmit_reproducible():
    cfg = ChannelConfig.white(2, 0.8)
    F = np.eye(2)
    a = transmit(cfg, F, np.ones((5, 2)), 42)
    assert np.array_equal(a, transmit(cfg, F, np.ones((5, 2)), 42))


def test_white_noise_variance():
    z = white_noise(1.2, 2, 400_000, 3.0, np.random.default_rng(0))
    # N0 / 2 per real part, so E|z_l|^2 = N0
    assert np.mean(np.abs(z) ** 2) == pytest.approx(3.0, rel=0.02)


def test_channel_validation():
    with pytest.raises(ValidationError):
        ChannelConfig(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0)
    with pytest.raises(DomainError):
        ChannelConfig(np.eye(2), 1.0, H=-1.0)
    with pytest.raises(DomainError):
        ChannelConfig(np.eye(2), 1.0, Theta=math.pi)
    cfg = ChannelConfig.white(2, 1.0)
    with pytest.raises(ValidationError):
        transmit(cfg, np.eye(3), np.ones(2), 0)
    with pytest.raises(ValidationError):
        equalize_coherent(cfg, np.array([[1.0, 0], [1.0, 0.0]]), np.ones(2))
