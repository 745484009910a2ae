"""Conditional (fixed fading envelope) error probabilities over AWMN channels.

Every formula takes the instantaneous SNR ``gamma = H^2 E_S / N0`` as its
single SNR argument. Error rates are symbol-level; for binary families they
are also bit-level.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sps

from . import special
from ._quad import integrate
from .errors import DomainError, SizeError, ValidationError
from .modem import Constellation, Family
from .special import as_normality, gamma_exp_mean, mcleish_q, mcleish_q_partial

__all__ = [
    "ErrorRateQuery",
    "CancellationWarning",
    "ber_binary_coherent",
    "ber_binary_map",
    "ber_bpsk",
    "ber_bfsk",
    "ber_ook",
    "ser_mask",
    "ser_mqam_rect",
    "ser_mqam_square",
    "ser_mpsk",
    "union_bound",
    "ser_noncoherent_orthogonal",
    "ser_noncoherent_orthogonal_map",
    "ser_mdpsk",
    "ber_bdpsk",
    "q_product",
    "error_rate",
    "MAX_MAP_NONCOHERENT_M",
]

MAX_MAP_NONCOHERENT_M = 16
_CANCEL_RATIO = 1e6


class CancellationWarning(RuntimeWarning):
    """The alternating sum lost most of its significant digits."""


def _gamma(g):
    g = float(g)
    if not (g >= 0 and math.isfinite(g)):
        raise DomainError("gamma must be a finite non-negative SNR, got %r" % g)
    return g


def _level(M, lo=2):
    if isinstance(M, bool) or int(M) != M or M < lo:
        raise ValidationError("M must be an integer >= %d" % lo)
    return int(M)


def _prob(p):
    return min(1.0, max(0.0, p))


def q_product(nu, a, b, cfg=None):
    """E[Q(a/sqrt(G)) Q(b/sqrt(G))] for a, b >= 0 via two partial McLeish Qs."""
    if a == 0.0 or b == 0.0:
        return 0.5 * mcleish_q(nu, b if a == 0.0 else a, cfg)
    return 0.5 * (mcleish_q_partial(nu, a, math.atan(a / b), cfg)
                  + mcleish_q_partial(nu, b, math.atan(b / a), cfg))


# ----------------------------------------------------------- coherent binary

def ber_binary_coherent(nu, gamma, rho: float, cfg=None) -> float:
    """Equal-prior binary error probability Q_nu(sqrt((1 - rho) gamma)).

    ``rho`` is the real cross-correlation coefficient of two equal-energy
    symbols: -1 antipodal, 0 orthogonal.
    """
    g = _gamma(gamma)
    if not -1.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [-1, 1]")
    return mcleish_q(nu, math.sqrt((1.0 - rho) * g), cfg)


def ber_bpsk(nu, gamma, cfg=None) -> float:
    return ber_binary_coherent(nu, gamma, -1.0, cfg)


def ber_bfsk(nu, gamma, cfg=None) -> float:
    return ber_binary_coherent(nu, gamma, 0.0, cfg)


def ber_ook(nu, gamma, cfg=None) -> float:
    """On-off keying with symbols 0 and sqrt(2 E_S): Q_nu(sqrt(gamma))."""
    return mcleish_q(nu, math.sqrt(_gamma(gamma)), cfg)


def ber_binary_map(nu, gamma, priors, rho: float = None, ook: bool = False, cfg=None) -> float:
    """Binary error probability of the MAP detector with unequal priors.

    With ``D = H^2 |s_a - s_b|^2 / N0`` (``2 gamma (1 - rho)`` for an
    equal-energy pair, ``2 gamma`` for OOK) and ``eta = ln(p_a / p_b)``::

        P = p_a Q_nu((D + eta) / sqrt(2 D)) + p_b Q_nu((D - eta) / sqrt(2 D))

    At ``D = 0`` the detector always picks the likelier symbol and ``P = min(p)``.
    """
    g = _gamma(gamma)
    pa, pb = (float(v) for v in priors)
    if pa <= 0 or pb <= 0 or abs(pa + pb - 1.0) > 1e-12:
        raise DomainError("priors must be two positive probabilities summing to 1")
    if ook:
        d = 2.0 * g
    else:
        if rho is None or not -1.0 <= rho <= 1.0:
            raise DomainError("rho in [-1, 1] is required for an equal-energy pair")
        d = 2.0 * g * (1.0 - rho)
    eta = math.log(pa / pb)
    if d == 0.0:
        return min(pa, pb)
    s = math.sqrt(2.0 * d)
    return _prob(pa * mcleish_q(nu, (d + eta) / s, cfg) + pb * mcleish_q(nu, (d - eta) / s, cfg))


# ------------------------------------------------------------- M-ary coherent

def ser_mask(nu, gamma, M: int, cfg=None) -> float:
    """M-ASK: 2 (1 - 1/M) Q_nu(sqrt(6 gamma / (M^2 - 1)))."""
    M = _level(M)
    g = _gamma(gamma)
    return 2.0 * (1.0 - 1.0 / M) * mcleish_q(nu, math.sqrt(6.0 * g / (M * M - 1)), cfg)


def ser_mqam_rect(nu, gamma, M_I: int, M_Q: int, kappa: float, cfg=None) -> float:
    """Rectangular M_I x M_Q QAM with quadrature energy share ``kappa``.

    ``2 p_I Q(b_I) + 2 p_Q Q(b_Q) - 4 p_I p_Q E[Q(b_I/sqrt G) Q(b_Q/sqrt G)]``
    with ``p = 1 - 1/M_rail``, ``b_I = sqrt(6 (1 - kappa) gamma / (M_I^2 - 1))``
    and ``b_Q = sqrt(6 kappa gamma / (M_Q^2 - 1))``.
    """
    M_I = _level(M_I)
    M_Q = _level(M_Q)
    if not 0.0 < kappa < 1.0:
        raise DomainError("kappa must lie in (0, 1)")
    g = _gamma(gamma)
    bi = math.sqrt(6.0 * (1.0 - kappa) * g / (M_I * M_I - 1))
    bq = math.sqrt(6.0 * kappa * g / (M_Q * M_Q - 1))
    pi_ = 1.0 - 1.0 / M_I
    pq = 1.0 - 1.0 / M_Q
    out = (2.0 * pi_ * mcleish_q(nu, bi, cfg) + 2.0 * pq * mcleish_q(nu, bq, cfg)
           - 4.0 * pi_ * pq * q_product(nu, bi, bq, cfg))
    return _prob(out)


def ser_mqam_square(nu, gamma, M: int, cfg=None) -> float:
    """Square M-QAM: 4(1 - 1/sqrt M) Q_nu(x) - 4(1 - 1/sqrt M)^2 Q_nu(x, pi/4), x = sqrt(3 gamma/(M-1))."""
    M = _level(M, 4)
    side = math.isqrt(M)
    if side * side != M:
        raise ValidationError("square QAM needs a perfect-square M")
    g = _gamma(gamma)
    x = math.sqrt(3.0 * g / (M - 1))
    c = 1.0 - 1.0 / side
    return _prob(4.0 * c * mcleish_q(nu, x, cfg) - 4.0 * c * c * mcleish_q_partial(nu, x, 0.25 * math.pi, cfg))


def ser_mpsk(nu, gamma, M: int, cfg=None) -> float:
    """M-PSK: Q_nu(sqrt(2 gamma) sin(pi/M), pi - pi/M)."""
    M = _level(M)
    g = _gamma(gamma)
    return mcleish_q_partial(nu, math.sqrt(2.0 * g) * math.sin(math.pi / M), math.pi - math.pi / M, cfg)


def union_bound(c: Constellation, nu, H: float, N0: float, cfg=None):
    """Union upper bounds on the SER.

    Returns ``(full, min_distance)``: the prior-weighted pairwise bound
    sum_m p_m sum_{k != m} Q_nu(H |s_m - s_k| / sqrt(2 N0)) and the looser
    (M - 1) Q_nu(H d_min / sqrt(2 N0)).
    """
    if not (H >= 0 and N0 > 0):
        raise DomainError("need H >= 0 and N0 > 0")
    s = c.symbols
    d = np.linalg.norm(s[:, None, :] - s[None, :, :], axis=2)
    scale = H / math.sqrt(2.0 * N0)
    cache = {}

    def q(x):
        key = round(x, 13)
        if key not in cache:
            cache[key] = mcleish_q(nu, x, cfg)
        return cache[key]

    full = math.fsum(c.priors[m] * math.fsum(q(scale * d[m, k]) for k in range(c.M) if k != m)
                     for m in range(c.M))
    dmin = c.min_distance()
    return full, (c.M - 1) * q(scale * dmin)


# ---------------------------------------------------------------- noncoherent

def _alternating(terms, label, fallback=None):
    terms = sorted(terms, key=abs, reverse=True)
    out = math.fsum(terms)
    big = max(abs(t) for t in terms)
    if big > _CANCEL_RATIO * abs(out):
        warnings.warn("%s: alternating sum cancelled (largest term %.3g, result %.3g)%s"
                      % (label, big, out, "; recomputed by quadrature" if fallback else ""),
                      CancellationWarning, stacklevel=3)
        if fallback is not None:
            return _prob(fallback())
    return _prob(out)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(160)
_RICE_HALF_WIDTH = 12.0


def _envelope_ser(M, a):
    """Conditional SER of orthogonal envelope detection, Rician parameter ``a`` per row.

    int rice_a(r) [1 - (1 - exp(-r^2/2))^(M-1)] dr on a Gauss-Legendre rule
    covering the Rician bulk; no alternating terms.
    """
    a = np.asarray(a, dtype=float)[:, None]
    lo = np.maximum(a - _RICE_HALF_WIDTH, 0.0)
    hi = a + _RICE_HALF_WIDTH
    half = 0.5 * (hi - lo)
    r = lo + half * (_GL_X[None, :] + 1.0)
    rice = r * np.exp(-0.5 * (r - a) ** 2) * sps.i0e(a * r)
    with np.errstate(divide="ignore"):
        miss = -np.expm1((M - 1) * np.log1p(-np.exp(-0.5 * r * r)))
    return np.sum(half * _GL_W[None, :] * rice * miss, axis=1)


def _noncoherent_by_quadrature(nu, g, M, cfg=None):
    n = as_normality(nu)
    cfg = special._cfg(cfg)

    def h(mix):
        mix = np.maximum(np.asarray(mix, dtype=float), 1e-300)
        return _envelope_ser(M, np.sqrt(np.minimum(2.0 * g / mix, 1e300)))

    if n.is_gaussian:
        return float(h(np.array([1.0]))[0])
    return special._mixture_integral(n.nu, h, cfg)


def ser_noncoherent_orthogonal(nu, gamma, M: int) -> float:
    """Equiprobable, equal-energy orthogonal signalling with envelope detection.

    sum_{k=1}^{M-1} (-1)^{k+1} C(M-1, k) / (k+1) E[exp(-k gamma / ((k+1) G))]

    When the alternating sum cancels (large M) a CancellationWarning is issued
    and the rate is recomputed from the Rician envelope integral instead.
    """
    M = _level(M)
    g = _gamma(gamma)
    terms = [(-1) ** (k + 1) * math.comb(M - 1, k) / (k + 1) * gamma_exp_mean(nu, k * g / (k + 1))
             for k in range(1, M)]
    return _alternating(terms, "ser_noncoherent_orthogonal",
                        fallback=lambda: _noncoherent_by_quadrature(nu, g, M))


def ser_noncoherent_orthogonal_map(nu, gammas, priors) -> float:
    """Orthogonal signalling with the MAP envelope detector argmax p_m gamma_m |s_m^H r|.

    Parameters
    ----------
    gammas : sequence of float
        Per-symbol SNRs H^2 |s_m|^2 / N0, all positive.
    priors : sequence of float
        Symbol probabilities.

    Notes
    -----
    Given symbol m, symbol n wins when its Rayleigh envelope exceeds
    c_n times the Rician envelope of m, ``c_n = (p_m/p_n)(gamma_m/gamma_n)^(3/2)``.
    Inclusion-exclusion over the set S of winners gives terms
    ``(-1)^(|S|+1) / (1 + Phi_S) E[exp(-Phi_S gamma_m / ((1 + Phi_S) G))]``
    with ``Phi_S = sum_{n in S} c_n^2``.
    """
    gam = np.asarray(gammas, dtype=float)
    pr = np.asarray(priors, dtype=float)
    M = gam.size
    if M < 2 or pr.shape != gam.shape:
        raise ValidationError("gammas and priors must have the same length >= 2")
    if M > MAX_MAP_NONCOHERENT_M:
        raise SizeError("MAP noncoherent SER is limited to M <= %d" % MAX_MAP_NONCOHERENT_M)
    if np.any(gam <= 0) or not np.all(np.isfinite(gam)):
        raise DomainError("per-symbol SNRs must be positive")
    if np.any(pr <= 0) or abs(pr.sum() - 1.0) > 1e-12:
        raise DomainError("priors must be positive and sum to 1")
    total = []
    for m in range(M):
        others = [n for n in range(M) if n != m]
        c2 = {n: (pr[m] / pr[n]) ** 2 * (gam[m] / gam[n]) ** 3 for n in others}
        terms = []
        for size in range(1, M):
            sign = 1.0 if size % 2 else -1.0
            for sub in itertools.combinations(others, size):
                phi = math.fsum(c2[n] for n in sub)
                terms.append(sign / (1.0 + phi) * gamma_exp_mean(nu, phi * gam[m] / (1.0 + phi)))
        total.append(pr[m] * _alternating(terms, "ser_noncoherent_orthogonal_map"))
    return _prob(math.fsum(total))


# ----------------------------------------------------------------------- DPSK

def ser_mdpsk(nu, gamma, M: int, cfg=None) -> float:
    """M-DPSK with differential detection over two symbols sharing one G.

    (1/pi) int_0^{pi - pi/M} E[exp(-gamma sin^2(pi/M) / ((1 + cos(pi/M) cos t) G))] dt
    """
    M = _level(M)
    g = _gamma(gamma)
    if g == 0.0:
        return 1.0 - 1.0 / M
    n = as_normality(nu)
    cfg = special._cfg(cfg)
    s2 = math.sin(math.pi / M) ** 2
    c = math.cos(math.pi / M)

    def f(t):
        return gamma_exp_mean(n, g * s2 / (1.0 + c * np.cos(t))) / math.pi

    value, _ = integrate(lambda t: np.asarray(f(t), dtype=float), 0.0, math.pi - math.pi / M, cfg)
    return _prob(value)


def ber_bdpsk(nu, gamma) -> float:
    """Binary DPSK: (1/2) E[exp(-gamma / G)]; 1/2 at gamma = 0."""
    return 0.5 * gamma_exp_mean(nu, _gamma(gamma))


# ------------------------------------------------------------------ dispatch

@dataclass(frozen=True)
class ErrorRateQuery:
    """One analytic error-rate evaluation.

    ``extra`` carries family-specific parameters: ``rho`` for a generic
    coherent binary pair, ``M_I``, ``M_Q``, ``kappa`` for rectangular QAM and
    ``priors`` for the MAP binary and noncoherent variants.
    """

    family: Family
    M: int
    nu: float
    gamma: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "nu", as_normality(self.nu).nu)
        object.__setattr__(self, "gamma", _gamma(self.gamma))


def error_rate(q: ErrorRateQuery, cfg=None) -> float:
    """Evaluate the closed form matching ``q.family``."""
    f, nu, g, ex = q.family, q.nu, q.gamma, q.extra
    pri = ex.get("priors")
    if f is Family.BPSK:
        return ber_binary_map(nu, g, pri, rho=-1.0, cfg=cfg) if pri is not None else ber_bpsk(nu, g, cfg)
    if f is Family.BFSK:
        rho = ex.get("rho", 0.0)
        if pri is not None:
            return ber_binary_map(nu, g, pri, rho=rho, cfg=cfg)
        return ber_binary_coherent(nu, g, rho, cfg)
    if f is Family.OOK:
        return ber_binary_map(nu, g, pri, ook=True, cfg=cfg) if pri is not None else ber_ook(nu, g, cfg)
    if f is Family.MASK:
        return ser_mask(nu, g, q.M, cfg)
    if f is Family.MQAM_SQUARE:
        return ser_mqam_square(nu, g, q.M, cfg)
    if f is Family.MQAM_RECT:
        mi, mq = ex.get("M_I"), ex.get("M_Q")
        if mi is None or mq is None or mi * mq != q.M:
            raise ValidationError("rectangular QAM needs M_I * M_Q == M")
        kappa = ex.get("kappa")
        if kappa is None:
            kappa = (mq * mq - 1) / (mi * mi + mq * mq - 2)
        return ser_mqam_rect(nu, g, mi, mq, kappa, cfg)
    if f is Family.MPSK:
        return ser_mpsk(nu, g, q.M, cfg)
    if f is Family.NONCOH_ORTHOGONAL:
        if pri is not None:
            gams = ex.get("gammas", [g] * q.M)
            return ser_noncoherent_orthogonal_map(nu, gams, pri)
        return ser_noncoherent_orthogonal(nu, g, q.M)
    if f is Family.MDPSK:
        return ber_bdpsk(nu, g) if q.M == 2 else ser_mdpsk(nu, g, q.M, cfg)
    raise ValidationError("unsupported family %s" % f)  # pragma: no cover
