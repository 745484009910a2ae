"""Special functions for McLeish laws.

Modified Bessel functions of the second kind, the Gaussian and Laplacian
tail functions, and the McLeish Q-function family (scalar, partial,
bivariate, multivariate) together with its closed-form bounds.

The McLeish Q-function is the tail of the standard McLeish law, that is of
``sqrt(G) * N`` with ``G ~ Gamma(nu, mean 1)`` and ``N`` standard normal.
For ``x >= 0`` it is evaluated from its angular form

    Q_nu(x) = 2^(1-nu) / (pi Gamma(nu)) *
              int_0^(pi/2) z^nu K_nu(z) dtheta,   z = 2x / (lambda0 sin theta)

with ``lambda0 = sqrt(2/nu)``. The integrand equals
``E[exp(-x^2 / (2 G sin^2 theta))] / pi``, which is how it is computed.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import special as sps

from . import _backend
from ._quad import integrate
from .errors import DomainError, NumericalError

GAUSSIAN_NU = 1e6
_GL64 = np.polynomial.legendre.leggauss(64)

__all__ = [
    "GAUSSIAN_NU",
    "QuadratureConfig",
    "Normality",
    "as_normality",
    "default_config",
    "bessel_k",
    "log_bessel_k",
    "gamma_pdf",
    "gamma_exp_mean",
    "gaussian_q",
    "gaussian_q_bivariate",
    "laplacian_q",
    "mcleish_q",
    "mcleish_q_bounds",
    "mcleish_q_bounds_raw",
    "mcleish_q_partial",
    "mcleish_q_bivariate",
    "mcleish_q_multivariate",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for every adaptive quadrature in the package."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_subdivisions < 10:
            raise DomainError("max_subdivisions must be at least 10")


def default_config() -> QuadratureConfig:
    """Default tolerances, with ``MCLEISH_QUAD_TOL`` overriding abs_tol."""
    tol = os.environ.get("MCLEISH_QUAD_TOL")
    if tol:
        try:
            return QuadratureConfig(abs_tol=float(tol))
        except ValueError as exc:
            raise DomainError("MCLEISH_QUAD_TOL must be a positive number") from exc
    return QuadratureConfig()


@dataclass(frozen=True)
class Normality:
    """Shape parameter nu of a McLeish law.

    ``math.inf`` (or any value above GAUSSIAN_NU) is the Gaussian limit.
    """

    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if math.isnan(nu) or not nu > 0:
            raise DomainError("normality nu must be positive, got %r" % self.nu)
        object.__setattr__(self, "nu", nu)

    @property
    def is_gaussian(self) -> bool:
        return self.nu > GAUSSIAN_NU

    @property
    def lambda0(self) -> float:
        return 0.0 if math.isinf(self.nu) else math.sqrt(2.0 / self.nu)


def as_normality(nu) -> Normality:
    return nu if isinstance(nu, Normality) else Normality(nu)


def _cfg(cfg):
    return default_config() if cfg is None else cfg


def _clamp(p, tol, what):
    if p < -tol or p > 1.0 + tol:
        raise NumericalError("%s left [0, 1] beyond tolerance: %.17g" % (what, p))
    return min(1.0, max(0.0, p))


# ---------------------------------------------------------------- Bessel K

def _check_bessel_args(order, x):
    if not np.all(np.isfinite(order)) or not np.all(np.isfinite(x)):
        raise DomainError("bessel_k needs finite inputs")
    if np.any(np.asarray(x) <= 0):
        raise DomainError("bessel_k needs x > 0")


def bessel_k(order, x):
    """Modified Bessel function of the second kind K_order(x), x > 0.

    Scalar ``x`` returns a float, array ``x`` an array. Returns 0 when the
    value underflows and inf when it overflows.
    """
    _check_bessel_args(order, x)
    if np.ndim(x) == 0:
        return _backend.kv(float(order), float(x))
    return _backend.kv_array(float(order), x)


def log_bessel_k(order, x):
    """Natural logarithm of K_order(x); finite wherever K is positive."""
    _check_bessel_args(order, x)
    if np.ndim(x) == 0:
        return _backend.log_kv(float(order), float(x))
    return _backend.log_kv_array(float(order), x)


# ------------------------------------------------------- Gamma mixing law

def gamma_pdf(nu, g):
    """Density nu^nu / Gamma(nu) g^(nu-1) exp(-nu g) of the mixing variable."""
    nu = as_normality(nu).nu
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = nu * math.log(nu) - math.lgamma(nu) + (nu - 1.0) * np.log(g) - nu * g
        out = np.where(g > 0, np.exp(logf), 0.0)
    return out if out.ndim else float(out)


def gamma_exp_mean(nu, a):
    """E[exp(-a / G)] for the unit-mean Gamma mixing variable G, a >= 0."""
    n = as_normality(nu)
    a = np.asarray(a, dtype=float)
    if n.is_gaussian:
        out = np.exp(-a)
    else:
        out = _backend.gamma_exp_mean(n.nu, a)
    return out if np.ndim(out) else float(out)


def _gamma_quantile(nu, p):
    return sps.gammaincinv(nu, p) / nu


def _mixture_integral(nu, h, cfg):
    """E[h(G)] by quadrature over the probability scale of G.

    The upper tail beyond survival abs_tol/10 is dropped; ``h`` must be
    bounded by 1 in magnitude so the truncation error stays within budget.
    """
    top = 1.0 - cfg.abs_tol / 10.0
    pts = [p for p in (1e-12, 1e-9, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9) if p < top]

    def f(p):
        return h(_gamma_quantile(nu, p))

    value, _ = integrate(f, 0.0, top, cfg, points=pts)
    return value


# ------------------------------------------------------ reference tails

def gaussian_q(x):
    """Standard Gaussian tail probability Pr{N > x}."""
    out = 0.5 * sps.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return out if np.ndim(out) else float(out)


def laplacian_q(x):
    """Tail of the unit-variance Laplacian law: 0.5 exp(-sqrt(2) x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * np.exp(-math.sqrt(2.0) * np.abs(x))
    out = np.where(x >= 0, half, 1.0 - half)
    return out if out.ndim else float(out)


def gaussian_q_bivariate(x, y, rho):
    """Pr{X > x, Y > y} for standard normals with correlation rho (|rho| < 1).

    Uses Q(x)Q(y) plus the Plackett correction integral over
    theta in [0, asin rho], evaluated with 64-point Gauss-Legendre.
    Broadcasts over ``x`` and ``y``.
    """
    if not abs(rho) < 1:
        raise DomainError("bivariate Q needs |rho| < 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = gaussian_q(x) * gaussian_q(y)
    top = math.asin(rho)
    if top == 0.0:
        return base
    t = 0.5 * top * (_GL64[0] + 1.0)
    w = 0.5 * top * _GL64[1]
    st = np.sin(t)
    c2 = np.cos(t) ** 2
    xe = np.asarray(x)[..., None]
    ye = np.asarray(y)[..., None]
    with np.errstate(invalid="ignore"):
        num = xe * xe + ye * ye - 2.0 * xe * ye * st
        num = np.where(np.isinf(xe) | np.isinf(ye), np.inf, num)
        corr = np.exp(-num / (2.0 * c2)) @ w / (2.0 * math.pi)
    return base + corr


# ---------------------------------------------------------- McLeish Q

def _q_integrand(n, x):
    x2 = 0.5 * x * x

    def f(theta):
        s = np.sin(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(s > 0, x2 / (s * s), np.inf)
        return _backend.gamma_exp_mean(n.nu, a) / math.pi

    return f


def _q_angle(n, x, phi, cfg):
    if x == 0.0:
        return phi / math.pi
    pts = (0.5 * math.pi,) if phi > 0.5 * math.pi else ()
    value, _ = integrate(_q_integrand(n, x), 0.0, phi, cfg, points=pts)
    return value


def mcleish_q(nu, x, cfg=None):
    """McLeish Q-function Q_nu(x) = Pr{X > x} for the standard McLeish law."""
    n = as_normality(nu)
    x = float(x)
    if not math.isfinite(x):
        if math.isnan(x):
            raise DomainError("x must not be NaN")
        return 0.0 if x > 0 else 1.0
    if n.is_gaussian:
        return gaussian_q(x)
    cfg = _cfg(cfg)
    if x < 0:
        return 1.0 - mcleish_q(n, -x, cfg)
    return _clamp(_q_angle(n, x, 0.5 * math.pi, cfg), 10 * cfg.abs_tol, "Q")


def mcleish_q_partial(nu, x, phi, cfg=None):
    """Partial McLeish Q-function: the angular integral taken over [0, phi].

    ``phi`` may range over [0, pi]; at phi = pi/2 this is mcleish_q.
    Negative ``x`` uses the reflection 1 - Q_nu(|x|, phi).
    """
    n = as_normality(nu)
    x = float(x)
    phi = float(phi)
    if not 0.0 <= phi <= math.pi + 1e-15:
        raise DomainError("phi must lie in [0, pi]")
    phi = min(phi, math.pi)
    if math.isnan(x):
        raise DomainError("x must not be NaN")
    if x < 0:
        return 1.0 - mcleish_q_partial(n, -x, phi, cfg)
    if math.isinf(x):
        return 0.0
    cfg = _cfg(cfg)
    if n.is_gaussian:
        n = Normality(math.inf)
    return _clamp(_q_angle(n, x, phi, cfg), 10 * cfg.abs_tol, "partial Q")


def mcleish_q_bounds_raw(nu, x):
    """Unclamped (lower, upper) Q-function bounds for x > 0.

    upper = (x/l0)^(nu-1/2) K_{nu+1/2}(2x/l0) / (sqrt(pi) Gamma(nu)) and the
    lower bound subtracts (l0/2x) times the same prefactor times K_{nu+3/2}.
    The lower bound can be negative and the upper one above 1 near x = 0.
    """
    n = as_normality(nu)
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError("bounds need finite x > 0")
    if n.is_gaussian:
        phi = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        up = phi / x
        return up - up / (x * x), up
    nv = n.nu
    l0 = n.lambda0
    z = 2.0 * x / l0
    pref = -0.5 * math.log(math.pi) - math.lgamma(nv) + (nv - 0.5) * math.log(x / l0)
    up = math.exp(pref + _backend.log_kv(nv + 0.5, z))
    gap = math.exp(pref + math.log(l0 / (2.0 * x)) + _backend.log_kv(nv + 1.5, z))
    return up - gap, up


def mcleish_q_bounds(nu, x):
    """(lower, upper) bounds on Q_nu(x) for x > 0, clamped to [0, 1]."""
    lo, up = mcleish_q_bounds_raw(nu, x)
    return min(1.0, max(0.0, lo)), min(1.0, max(0.0, up))


def mcleish_q_bivariate(nu, x, y, rho, cfg=None):
    """Joint tail Pr{X > x, Y > y} of the standard CES McLeish pair.

    Mixture over the shared Gamma variable of the Gaussian bivariate tail:
    int Q2(x/sqrt(g), y/sqrt(g), rho) f_G(g) dg.
    """
    n = as_normality(nu)
    rho = float(rho)
    if not abs(rho) < 1:
        raise DomainError("bivariate Q needs |rho| < 1")
    x = float(x)
    y = float(y)
    if n.is_gaussian:
        return float(gaussian_q_bivariate(x, y, rho))
    cfg = _cfg(cfg)

    def h(g):
        sg = np.sqrt(g)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(sg > 0, x / sg, math.copysign(np.inf, x) if x else 0.0)
            v = np.where(sg > 0, y / sg, math.copysign(np.inf, y) if y else 0.0)
        return gaussian_q_bivariate(u, v, rho)

    return _clamp(_mixture_integral(n.nu, h, cfg), 10 * cfg.abs_tol, "bivariate Q")


def mcleish_q_multivariate(nu, x, cfg=None):
    """Joint tail Pr{X_1 > x_1, ..., X_L > x_L} of the standard multivariate law.

    Given G = g the components are independent normals with variance g, so
    the value is int prod_l Q(x_l / sqrt(g)) f_G(g) dg.
    """
    n = as_normality(nu)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if xs.ndim != 1 or xs.size == 0:
        raise DomainError("x must be a non-empty vector")
    if not np.all(np.isfinite(xs)):
        raise DomainError("x entries must be finite")
    if xs.size == 1:
        return mcleish_q(n, xs[0], cfg)
    if n.is_gaussian:
        return float(np.prod(gaussian_q(xs)))
    cfg = _cfg(cfg)

    def h(g):
        sg = np.sqrt(g)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            lim = np.where(xs > 0, np.inf, np.where(xs < 0, -np.inf, 0.0))
            arg = np.where(sg > 0, xs[None, :] / sg, lim[None, :])
        return np.prod(gaussian_q(arg), axis=1)

    return _clamp(_mixture_integral(n.nu, h, cfg), 10 * cfg.abs_tol, "multivariate Q")
