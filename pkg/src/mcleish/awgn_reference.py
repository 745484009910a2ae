"""Classical Gaussian-noise error rates, coded independently of the McLeish paths.

These use textbook forms (Gaussian tails from scipy.stats.norm, phase
densities, Rician envelope integrals, Pawula's DPSK integral) rather than
the angular Q-function representation, so they serve as an oracle for the
large-normality limit of :mod:`mcleish.analytic_error`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special
from scipy.stats import norm

__all__ = [
    "bpsk",
    "bfsk",
    "ook",
    "mask",
    "mqam_square",
    "mqam_rect",
    "mpsk",
    "noncoherent_orthogonal",
    "mdpsk",
    "bdpsk",
]


def bpsk(gamma):
    return norm.sf(math.sqrt(2.0 * gamma))


def bfsk(gamma):
    return norm.sf(math.sqrt(gamma))


def ook(gamma):
    return norm.sf(math.sqrt(gamma))


def mask(gamma, M):
    return 2.0 * (M - 1) / M * norm.sf(math.sqrt(6.0 * gamma / (M * M - 1)))


def _rail(gamma_rail, M):
    # error probability of one M-level rail carrying energy share gamma_rail
    return 2.0 * (1.0 - 1.0 / M) * norm.sf(math.sqrt(6.0 * gamma_rail / (M * M - 1)))


def mqam_square(gamma, M):
    side = math.isqrt(M)
    p = 2.0 * (1.0 - 1.0 / side) * norm.sf(math.sqrt(3.0 * gamma / (M - 1)))
    return 1.0 - (1.0 - p) ** 2


def mqam_rect(gamma, M_I, M_Q, kappa):
    return 1.0 - (1.0 - _rail((1 - kappa) * gamma, M_I)) * (1.0 - _rail(kappa * gamma, M_Q))


def mpsk(gamma, M):
    """1 minus the integral of the Gaussian-noise phase density over the decision wedge."""
    def pdf(t):
        a = math.sqrt(2.0 * gamma) * math.cos(t)
        return math.exp(-gamma) / (2.0 * math.pi) * (
            1.0 + math.sqrt(2.0 * math.pi) * a * math.exp(0.5 * a * a) * norm.cdf(a))

    # exp(a^2/2) Phi(a) overflows for large a; use the scaled erfcx form instead
    def pdf_stable(t):
        a = math.sqrt(2.0 * gamma) * math.cos(t)
        s = math.sqrt(gamma) * math.sin(t)
        body = 0.5 * math.sqrt(2.0 * math.pi) * a * special.erfcx(-a / math.sqrt(2.0))
        return (math.exp(-gamma) + math.exp(-s * s) * body) / (2.0 * math.pi)

    f = pdf_stable if gamma > 50 else pdf
    pc, _ = integrate.quad(f, -math.pi / M, math.pi / M, epsabs=1e-13, epsrel=1e-12)
    return 1.0 - pc


def noncoherent_orthogonal(gamma, M):
    """1 - int r e^{-(r^2 + a^2)/2} I0(a r) (1 - e^{-r^2/2})^(M-1) dr with a = sqrt(2 gamma)."""
    a = math.sqrt(2.0 * gamma)

    def f(r):
        return r * math.exp(-0.5 * (r - a) ** 2) * special.i0e(a * r) * (-math.expm1(-0.5 * r * r)) ** (M - 1)

    hi = a + 40.0
    pc, _ = integrate.quad(f, 0.0, hi, points=[a] if a > 0 else None, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 1.0 - pc


def mdpsk(gamma, M):
    """Pawula's single-integral form for differential detection."""
    c = math.cos(math.pi / M)

    def f(t):
        d = 1.0 - c * math.cos(t)
        return math.exp(-gamma * d) / d

    v, _ = integrate.quad(f, -0.5 * math.pi, 0.5 * math.pi, epsabs=1e-14, epsrel=1e-12)
    return math.sin(math.pi / M) / (2.0 * math.pi) * v


def bdpsk(gamma):
    return 0.5 * math.exp(-gamma)
