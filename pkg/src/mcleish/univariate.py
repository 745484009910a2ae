"""Univariate McLeish laws and sums of independent McLeish variables.

A McLeish variable is ``X = mu + sqrt(G) * sigma * N`` where ``N`` is standard
normal and ``G ~ Gamma(shape nu, scale 1/nu)`` has unit mean. The shape
``nu`` (the normality) moves the law from a point mass (nu -> 0) through the
Laplacian (nu = 1) to the Gaussian (nu -> inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import special
from .errors import DomainError, SizeError, ValidationError
from .special import Normality, as_normality

__all__ = [
    "McLeishParams",
    "SumSpec",
    "NotCollapsible",
    "pdf",
    "cdf",
    "ccdf",
    "mgf",
    "moment",
    "central_moment",
    "excess_kurtosis",
    "sample",
    "sample_mixing",
    "sum_mgf",
    "sum_collapse",
    "sum_moment",
    "sum_sample",
    "MAX_SUM_MOMENT",
]

MAX_SUM_MOMENT = 8


@dataclass(frozen=True)
class McLeishParams:
    """Parameters of a univariate McLeish law.

    Parameters
    ----------
    nu : float
        Normality, positive. ``math.inf`` selects the Gaussian limit.
    mu : float
        Mean.
    sigma2 : float
        Variance, positive.
    """

    nu: float
    mu: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "nu", Normality(self.nu).nu)
        mu = float(self.mu)
        s2 = float(self.sigma2)
        if not math.isfinite(mu):
            raise DomainError("mu must be finite")
        if not (s2 > 0 and math.isfinite(s2)):
            raise DomainError("sigma2 must be positive and finite, got %r" % self.sigma2)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", s2)

    @property
    def normality(self) -> Normality:
        return Normality(self.nu)

    @property
    def is_gaussian(self) -> bool:
        return self.normality.is_gaussian

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def lam(self) -> float:
        """Component deviation sqrt(2 sigma2 / nu); zero in the Gaussian limit."""
        return 0.0 if math.isinf(self.nu) else math.sqrt(2.0 * self.sigma2 / self.nu)

    @property
    def lambda0(self) -> float:
        return self.normality.lambda0


def _scalar_out(out):
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------------------ density

def pdf(p: McLeishParams, x, return_singular: bool = False):
    """Probability density of the McLeish law.

    Parameters
    ----------
    p : McLeishParams
    x : float or array_like
    return_singular : bool, optional
        Also return a boolean mask marking points where the density is
        infinite (``x == mu`` with ``nu <= 1/2``).

    Returns
    -------
    float or ndarray, and optionally the singular mask.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainError("x must not be NaN")
    d = np.abs(x - p.mu)
    singular = np.zeros(d.shape, dtype=bool)
    if p.is_gaussian:
        out = np.exp(-0.5 * d * d / p.sigma2) / math.sqrt(2.0 * math.pi * p.sigma2)
    else:
        nu, lam = p.nu, p.lam
        out = np.zeros(d.shape)
        pos = (d > 0) & np.isfinite(d)
        if np.any(pos):
            dp = d[pos]
            logk = special.log_bessel_k(nu - 0.5, 2.0 * dp / lam)
            logf = (math.log(2.0 / math.sqrt(math.pi)) + (nu - 0.5) * np.log(dp)
                    - math.lgamma(nu) - (nu + 0.5) * math.log(lam) + logk)
            out[pos] = np.exp(logf)
        at0 = d == 0
        if np.any(at0):
            if nu > 0.5:
                out[at0] = math.exp(math.lgamma(nu - 0.5) - math.lgamma(nu)
                                    - 0.5 * math.log(math.pi) - math.log(lam))
            else:
                out[at0] = math.inf
                singular = at0
    out = _scalar_out(out)
    if return_singular:
        return out, (bool(singular) if np.ndim(singular) == 0 else singular)
    return out


def ccdf(p: McLeishParams, x, cfg=None):
    """Tail probability Pr{X > x} = Q_nu((x - mu) / sigma)."""
    xa = np.asarray(x, dtype=float)
    z = (xa - p.mu) / p.sigma
    out = np.array([special.mcleish_q(p.nu, v, cfg) for v in z.reshape(-1)]).reshape(z.shape)
    return _scalar_out(out)


def cdf(p: McLeishParams, x, cfg=None):
    """Distribution function Pr{X <= x} = 1 - Q_nu((x - mu) / sigma)."""
    return _scalar_out(1.0 - np.asarray(ccdf(p, x, cfg)))


# ----------------------------------------------------------- MGF, moments

def _log_mgf_core(nu, lam, sigma2, s):
    """log of (1 - lam^2 s^2 / 4)^(-nu), with the Gaussian limit exp(sigma2 s^2/2)."""
    if math.isinf(nu):
        return 0.5 * sigma2 * s * s
    return -nu * math.log1p(-0.25 * lam * lam * s * s)


def mgf(p: McLeishParams, s: float) -> float:
    """Moment generating function E[exp(-s X)].

    Exists for ``|s| < 2 / lam``; the Gaussian limit exists everywhere.

    Raises
    ------
    DomainError
        When ``s`` is outside the existence region.
    """
    s = float(s)
    if not math.isfinite(s):
        raise DomainError("s must be finite")
    if not math.isinf(p.nu) and abs(s) >= 2.0 / p.lam:
        raise DomainError("mgf exists only for |s| < 2/lambda = %.6g" % (2.0 / p.lam))
    return math.exp(-s * p.mu + _log_mgf_core(p.nu, p.lam, p.sigma2, s))


def _check_order(n):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError("moment order must be a non-negative integer")
    return int(n)


def central_moment(p: McLeishParams, k: int) -> float:
    """E[(X - mu)^k]; zero for odd k."""
    k = _check_order(k)
    if k % 2:
        return 0.0
    if k == 0:
        return 1.0
    if math.isinf(p.nu):
        # sigma^k (k-1)!!
        return math.exp(0.5 * k * math.log(p.sigma2) + math.lgamma(k + 1)
                        - math.lgamma(k // 2 + 1) - (k // 2) * math.log(2.0))
    h = 0.5 * k
    logm = (math.lgamma(p.nu + h) - math.lgamma(p.nu) + math.lgamma(0.5 + h)
            - math.lgamma(0.5) + k * math.log(p.lam))
    return math.exp(logm)


def moment(p: McLeishParams, n: int) -> float:
    """Raw moment E[X^n] from the binomial expansion around the mean."""
    n = _check_order(n)
    terms = [math.comb(n, k) * p.mu ** (n - k) * central_moment(p, k) for k in range(0, n + 1, 2)]
    return math.fsum(terms)


def excess_kurtosis(p: McLeishParams) -> float:
    """Excess kurtosis 3/nu (zero in the Gaussian limit)."""
    return 0.0 if math.isinf(p.nu) else 3.0 / p.nu


# ------------------------------------------------------------- sampling

def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValidationError("an explicit seed is required")
    return np.random.default_rng(seed)


def sample_mixing(nu, n, rng):
    """Draw ``n`` unit-mean Gamma(nu) mixing variables (ones in the Gaussian limit)."""
    nu = as_normality(nu).nu
    if math.isinf(nu):
        return np.ones(n)
    return rng.gamma(nu, 1.0 / nu, size=n)


def sample(p: McLeishParams, n: int, seed) -> np.ndarray:
    """Draw ``n`` independent McLeish variates.

    Parameters
    ----------
    p : McLeishParams
    n : int
        Number of draws, at least 1.
    seed : int, SeedSequence or numpy Generator
        Required; the result is a deterministic function of it.
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    rng = _rng(seed)
    g = sample_mixing(p.nu, int(n), rng)
    z = rng.standard_normal(int(n))
    return p.mu + np.sqrt(g) * p.sigma * z


# ------------------------------------------------------------------ sums

@dataclass(frozen=True)
class SumSpec:
    """Sum of independent McLeish variables, one per entry of ``terms``."""

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValidationError("a sum needs at least one term")
        for t in terms:
            if not isinstance(t, McLeishParams):
                raise ValidationError("sum terms must be McLeishParams")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, terms: Sequence[McLeishParams]) -> "SumSpec":
        return cls(tuple(terms))


@dataclass(frozen=True)
class NotCollapsible:
    """Returned by sum_collapse when the sum is not a single McLeish law."""

    reason: str

    def __bool__(self):
        return False


def sum_mgf(s: SumSpec, t: float) -> float:
    """MGF of the sum: product of the term MGFs, accumulated in log space."""
    t = float(t)
    finite = [x.lam for x in s.terms if not math.isinf(x.nu)]
    if finite:
        bound = 2.0 / max(finite)
        if abs(t) >= bound:
            raise DomainError("sum mgf exists only for |t| < %.6g" % bound)
    logm = math.fsum(-t * x.mu + _log_mgf_core(x.nu, x.lam, x.sigma2, t) for x in s.terms)
    return math.exp(logm)


def sum_collapse(s: SumSpec, rtol: float = 1e-12):
    """Collapse a sum with a common component deviation into one McLeish law.

    With equal ``lam`` the sum is McLeish with ``nu = sum nu_l``,
    ``mu = sum mu_l`` and ``sigma2 = nu * lam^2 / 2``. Gaussian terms
    collapse only with other Gaussian terms.
    """
    terms = s.terms
    mu = math.fsum(t.mu for t in terms)
    if all(math.isinf(t.nu) for t in terms):
        return McLeishParams(math.inf, mu, math.fsum(t.sigma2 for t in terms))
    if any(math.isinf(t.nu) for t in terms):
        return NotCollapsible("mixture of Gaussian and finite-normality terms")
    lam0 = terms[0].lam
    for t in terms[1:]:
        if abs(t.lam - lam0) > rtol * lam0:
            return NotCollapsible("component deviations differ")
    nu = math.fsum(t.nu for t in terms)
    return McLeishParams(nu, mu, 0.5 * nu * lam0 * lam0)


def sum_moment(s: SumSpec, n: int) -> float:
    """Raw moment of the sum by multinomial expansion of per-term moments.

    Raises
    ------
    SizeError
        For ``n > 8``.
    """
    n = _check_order(n)
    if n > MAX_SUM_MOMENT:
        raise SizeError("sum moments are available up to order %d" % MAX_SUM_MOMENT)
    # acc[k] = E[(X_1 + ... + X_j)^k]; fold in one term at a time.
    acc = [1.0] + [0.0] * n
    for t in s.terms:
        m = [moment(t, k) for k in range(n + 1)]
        acc = [math.fsum(math.comb(k, j) * acc[j] * m[k - j] for j in range(k + 1))
               for k in range(n + 1)]
    return acc[n]


def sum_sample(s: SumSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` realisations of the sum; terms are drawn in order from one stream."""
    rng = _rng(seed)
    out = np.zeros(int(n))
    for t in s.terms:
        out += sample(t, n, rng)
    return out
