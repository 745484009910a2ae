"""Complex scalar and multivariate McLeish laws.

Complex scalar laws are ``Z = mu + sqrt(G) * sigma * (N1 + j N2')`` where
the inphase and quadrature normals have correlation ``rho`` (``rho = 0`` is
the circular CCS case, otherwise elliptical CES). ``sigma2`` is the variance
of each component.

Multivariate laws share one mixing variable per vector draw:
``X = mu + sqrt(G) * D N`` with ``cov = D D^T``. In the complex case
``Z = mu + sqrt(G) * D (N1 + j N2)`` and ``cov = D D^H`` is the covariance of
the real (equivalently imaginary) parts, so ``E[(Z - mu)(Z - mu)^H] = 2 cov``
and the pseudo-covariance is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.stats import multivariate_normal

from . import special
from .errors import DomainError, SizeError, ValidationError
from .special import Normality, as_normality
from .univariate import McLeishParams, _rng, sample_mixing
from . import univariate

__all__ = [
    "ComplexMcLeishParams",
    "MvMcLeishParams",
    "MAX_JOINT_MOMENT",
    "ccs_pdf",
    "ces_pdf",
    "ccs_cdf",
    "ces_cdf",
    "ccs_mgf",
    "ces_mgf",
    "ccs_joint_moment",
    "complex_sample",
    "mv_sample",
    "mv_pdf",
    "mv_cdf",
    "mv_ccdf",
    "mv_mgf",
    "mv_affine",
    "mv_condition",
]

MAX_JOINT_MOMENT = 8


@dataclass(frozen=True)
class ComplexMcLeishParams:
    """Complex McLeish law with per-component variance ``sigma2``.

    ``rho`` is the inphase/quadrature correlation; ``rho = 0`` gives the
    circular law. ``|rho| = 1`` is accepted but flagged as ``degenerate``.
    """

    nu: float
    mu: complex = 0j
    sigma2: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nu", Normality(self.nu).nu)
        mu = complex(self.mu)
        if not (math.isfinite(mu.real) and math.isfinite(mu.imag)):
            raise DomainError("mu must be finite")
        s2 = float(self.sigma2)
        if not (s2 > 0 and math.isfinite(s2)):
            raise DomainError("sigma2 must be positive and finite")
        rho = float(self.rho)
        if not abs(rho) <= 1:
            raise DomainError("rho must lie in [-1, 1]")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", s2)
        object.__setattr__(self, "rho", rho)

    @property
    def degenerate(self) -> bool:
        return abs(self.rho) == 1.0

    @property
    def is_circular(self) -> bool:
        return self.rho == 0.0

    @property
    def is_gaussian(self) -> bool:
        return Normality(self.nu).is_gaussian

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def lam(self) -> float:
        return 0.0 if math.isinf(self.nu) else math.sqrt(2.0 * self.sigma2 / self.nu)

    def component(self, which: str = "re") -> McLeishParams:
        """Marginal law of the real (``"re"``) or imaginary (``"im"``) part."""
        m = self.mu.real if which == "re" else self.mu.imag
        return McLeishParams(self.nu, m, self.sigma2)


def _require_circular(p):
    if not p.is_circular:
        raise DomainError("this operation needs rho = 0; use the elliptical variant")


def _require_elliptic(p):
    if p.degenerate:
        raise DomainError("|rho| = 1 is a degenerate complex law")


# ----------------------------------------------------------- density

def _radial_pdf(nu, sigma2, r):
    """Density of the circular law (per unit area) at modulus r >= 0."""
    r = np.asarray(r, dtype=float)
    if Normality(nu).is_gaussian:
        return np.exp(-0.5 * r * r / sigma2) / (2.0 * math.pi * sigma2)
    lam = math.sqrt(2.0 * sigma2 / nu)
    out = np.empty(r.shape)
    pos = r > 0
    if np.any(pos):
        rp = r[pos]
        logf = (math.log(2.0 / math.pi) + (nu - 1.0) * np.log(rp) - math.lgamma(nu)
                - (nu + 1.0) * math.log(lam) + special.log_bessel_k(nu - 1.0, 2.0 * rp / lam))
        out[pos] = np.exp(logf)
    if np.any(~pos):
        if nu > 1.0:
            out[~pos] = math.exp(math.lgamma(nu - 1.0) - math.lgamma(nu)) / (math.pi * lam * lam)
        else:
            out[~pos] = math.inf
    return out


def ccs_pdf(p: ComplexMcLeishParams, z):
    """Density of the circular complex law over the complex plane."""
    _require_circular(p)
    r = np.abs(np.asarray(z, dtype=complex) - p.mu)
    return univariate._scalar_out(_radial_pdf(p.nu, p.sigma2, r))


def _mahalanobis_modulus(d, rho):
    a, b = d.real, d.imag
    return np.sqrt(np.maximum(a * a + b * b - 2.0 * rho * a * b, 0.0) / (1.0 - rho * rho))


def ces_pdf(p: ComplexMcLeishParams, z):
    """Density of the elliptical complex law; equals ccs_pdf at rho = 0."""
    _require_elliptic(p)
    d = np.asarray(z, dtype=complex) - p.mu
    r = _mahalanobis_modulus(d, p.rho)
    out = _radial_pdf(p.nu, p.sigma2, r) / math.sqrt(1.0 - p.rho * p.rho)
    return univariate._scalar_out(out)


# ----------------------------------------------------------- CDFs

def _product_tail(n, a, b, cfg):
    """E[Q(a/sqrt G) Q(b/sqrt G)] for a, b >= 0 through two partial Q terms."""
    if a == 0.0 and b == 0.0:
        return 0.25
    ta = math.atan2(a, b)
    tb = math.atan2(b, a)
    return 0.5 * special.mcleish_q_partial(n, a, ta, cfg) + 0.5 * special.mcleish_q_partial(n, b, tb, cfg)


def _standardize(p, z):
    z = complex(z)
    if math.isnan(z.real) or math.isnan(z.imag):
        raise DomainError("z must not be NaN")
    return (z.real - p.mu.real) / p.sigma, (z.imag - p.mu.imag) / p.sigma


def ccs_cdf(p: ComplexMcLeishParams, z, cfg=None) -> float:
    """Pr{Re Z <= Re z, Im Z <= Im z} for the circular law.

    The joint tail of the two components is a partial Q-function
    combination; the four sign quadrants of the standardized point follow
    by reflecting each component.
    """
    _require_circular(p)
    n = as_normality(p.nu)
    u, v = _standardize(p, z)
    if math.isinf(u) or math.isinf(v):
        if u == -math.inf or v == -math.inf:
            return 0.0
        if u == math.inf and v == math.inf:
            return 1.0
        return 1.0 - special.mcleish_q(n, v if math.isinf(u) else u, cfg)
    qu = special.mcleish_q(n, u, cfg)
    qv = special.mcleish_q(n, v, cfg)
    # Joint tail E[Q(u/sqrtG) Q(v/sqrtG)], reflecting negative arguments.
    au, av = abs(u), abs(v)
    j = _product_tail(n, au, av, cfg)
    if u >= 0 and v >= 0:
        tail = j
    elif u < 0 and v >= 0:
        tail = qv - j
    elif u >= 0 and v < 0:
        tail = qu - j
    else:
        tail = 1.0 - special.mcleish_q(n, au, cfg) - special.mcleish_q(n, av, cfg) + j
    out = 1.0 - qu - qv + tail
    return min(1.0, max(0.0, out))


def ces_cdf(p: ComplexMcLeishParams, z, cfg=None) -> float:
    """Pr{Re Z <= Re z, Im Z <= Im z} for the elliptical law.

    Uses inclusion-exclusion with the bivariate Q-function, which is valid
    for every sign combination of the standardized coordinates.
    """
    _require_elliptic(p)
    n = as_normality(p.nu)
    u, v = _standardize(p, z)
    if math.isinf(u) or math.isinf(v):
        if u == -math.inf or v == -math.inf:
            return 0.0
        if u == math.inf and v == math.inf:
            return 1.0
        return 1.0 - special.mcleish_q(n, v if math.isinf(u) else u, cfg)
    out = (1.0 - special.mcleish_q(n, u, cfg) - special.mcleish_q(n, v, cfg)
           + special.mcleish_q_bivariate(n, u, v, p.rho, cfg))
    return min(1.0, max(0.0, out))


# ----------------------------------------------------------- MGF, moments

def _mix_log_mgf(nu, quad):
    """log E[exp(G quad / 2)] for the unit-mean Gamma mixing variable."""
    if math.isinf(nu):
        return 0.5 * quad
    t = quad / (2.0 * nu)
    if t >= 1.0:
        raise DomainError("argument outside the MGF existence region")
    return -nu * math.log1p(-t)


def ces_mgf(p: ComplexMcLeishParams, s) -> float:
    """E[exp(-<s, Z>)] with the real inner product <s, z> = Re(conj(s) z).

    Exists while sigma2 (s_r^2 + s_i^2 + 2 rho s_r s_i) < 2 nu.
    """
    s = complex(s)
    quad = p.sigma2 * (s.real ** 2 + s.imag ** 2 + 2.0 * p.rho * s.real * s.imag)
    inner = s.real * p.mu.real + s.imag * p.mu.imag
    return math.exp(-inner + _mix_log_mgf(p.nu, quad))


def ccs_mgf(p: ComplexMcLeishParams, s) -> float:
    """Circular-law MGF: exp(-<s, mu>) (1 - lam^2 |s|^2 / 4)^(-nu)."""
    _require_circular(p)
    return ces_mgf(p, s)


def _pochhammer_log(a, n):
    return math.lgamma(a + n) - math.lgamma(a)


def ccs_joint_moment(p: ComplexMcLeishParams, m: int, n: int) -> float:
    """E[X1^m X2^n] for the components X1 = Re Z, X2 = Im Z of the circular law.

    The centred moments are lam^(k+l) (1/2)_{k/2} (1/2)_{l/2} (nu)_{(k+l)/2}
    for even k and l, and zero otherwise.
    """
    _require_circular(p)
    m = univariate._check_order(m)
    n = univariate._check_order(n)
    if m > MAX_JOINT_MOMENT or n > MAX_JOINT_MOMENT:
        raise SizeError("joint moments are available up to order %d" % MAX_JOINT_MOMENT)

    def centred(k, l):
        if k % 2 or l % 2:
            return 0.0
        if k == 0 and l == 0:
            return 1.0
        h = 0.5 * (k + l)
        if math.isinf(p.nu):
            # sigma^(k+l) (k-1)!! (l-1)!!
            return math.exp(h * math.log(p.sigma2) + _pochhammer_log(0.5, k / 2)
                            + _pochhammer_log(0.5, l / 2) + h * math.log(2.0))
        return math.exp((k + l) * math.log(p.lam) + _pochhammer_log(0.5, k / 2)
                        + _pochhammer_log(0.5, l / 2) + _pochhammer_log(p.nu, h))

    mr, mi = p.mu.real, p.mu.imag
    terms = []
    for k in range(0, m + 1):
        for l in range(0, n + 1):
            c = centred(k, l)
            if c:
                terms.append(math.comb(m, k) * math.comb(n, l) * mr ** (m - k) * mi ** (n - l) * c)
    return math.fsum(terms)


def complex_sample(p: ComplexMcLeishParams, n: int, seed) -> np.ndarray:
    """Draw ``n`` complex McLeish variates with inphase/quadrature correlation rho."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    rng = _rng(seed)
    n = int(n)
    g = sample_mixing(p.nu, n, rng)
    w = rng.standard_normal((n, 2))
    re = w[:, 0]
    im = p.rho * w[:, 0] + math.sqrt(max(0.0, 1.0 - p.rho * p.rho)) * w[:, 1]
    return p.mu + np.sqrt(g) * p.sigma * (re + 1j * im)


# ----------------------------------------------------------- multivariate

@dataclass(frozen=True, eq=False)
class MvMcLeishParams:
    """Multivariate McLeish law, real or complex.

    Parameters
    ----------
    nu : float
        Normality shared by all components.
    mean : array_like, shape (L,)
    cov : array_like, shape (L, L)
        Symmetric (or Hermitian) positive definite. For complex laws this is
        the covariance of the real parts, half of E[(Z-mu)(Z-mu)^H].
    complex_valued : bool, optional
        Force a complex law; inferred from the dtypes otherwise.
    """

    nu: float
    mean: np.ndarray
    cov: np.ndarray
    complex_valued: bool = None
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nu", Normality(self.nu).nu)
        cov = np.atleast_2d(np.asarray(self.cov))
        mean = np.atleast_1d(np.asarray(self.mean))
        cplx = self.complex_valued
        if cplx is None:
            cplx = np.iscomplexobj(cov) or np.iscomplexobj(mean)
        dtype = complex if cplx else float
        if not cplx and (np.iscomplexobj(cov) or np.iscomplexobj(mean)):
            raise ValidationError("complex entries given for a real law")
        cov = np.array(cov, dtype=dtype)
        mean = np.array(mean, dtype=dtype)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValidationError("cov must be a square matrix")
        if mean.shape != (cov.shape[0],):
            raise ValidationError("mean length must match cov")
        if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(mean))):
            raise DomainError("mean and cov must be finite")
        scale = max(np.max(np.abs(cov)), 1e-300)
        if np.max(np.abs(cov - cov.conj().T)) > 1e-10 * scale:
            raise ValidationError("cov must be symmetric (Hermitian)")
        cov = 0.5 * (cov + cov.conj().T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("cov must be positive definite") from exc
        if np.any(np.real(np.diag(chol)) <= 0) or not np.all(np.isfinite(chol)):
            raise ValidationError("cov must be positive definite")
        for name, val in (("cov", cov), ("mean", mean), ("chol", chol)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "complex_valued", bool(cplx))

    @property
    def L(self) -> int:
        return self.cov.shape[0]

    @property
    def is_gaussian(self) -> bool:
        return Normality(self.nu).is_gaussian

    @property
    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.real(np.diag(self.chol)))))

    def whiten(self, x) -> np.ndarray:
        """Solve chol y = x - mean along the last axis."""
        d = np.asarray(x) - self.mean
        y = sla.solve_triangular(self.chol, np.atleast_2d(d).T, lower=True)
        return y.T.reshape(d.shape)

    def real_embedding(self):
        """(mean, cov) of the stacked real vector [Re Z; Im Z] (identity for real laws)."""
        if not self.complex_valued:
            return self.mean, self.cov
        a, b = self.cov.real, self.cov.imag
        big = np.block([[a, -b], [b, a]])
        return np.concatenate([self.mean.real, self.mean.imag]), big


def mv_sample(p: MvMcLeishParams, n: int, seed) -> np.ndarray:
    """Draw ``n`` vectors, one shared mixing variable per row; shape (n, L)."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    rng = _rng(seed)
    n = int(n)
    g = sample_mixing(p.nu, n, rng)
    w = rng.standard_normal((n, p.L))
    if p.complex_valued:
        w = w + 1j * rng.standard_normal((n, p.L))
    return p.mean + np.sqrt(g)[:, None] * (w @ p.chol.T)


def _check_dim(p, x):
    x = np.asarray(x)
    if x.shape[-1:] != (p.L,):
        raise ValidationError("expected vectors of length %d, got shape %s" % (p.L, x.shape))
    return x


def mv_pdf(p: MvMcLeishParams, x):
    """Joint density at ``x`` (shape (L,) or (n, L)).

    Real laws use K_{nu - L/2} of the Mahalanobis radius; complex laws use
    K_{nu - L} with the density taken over C^L.
    """
    x = _check_dim(p, x)
    y = p.whiten(x)
    q = np.sum(np.abs(y) ** 2, axis=-1)
    L = p.L
    nu = p.nu
    if p.complex_valued:
        dof = float(L)
        lognorm = -L * math.log(2.0 * math.pi) - p.logdet
    else:
        dof = 0.5 * L
        lognorm = -0.5 * L * math.log(2.0 * math.pi) - 0.5 * p.logdet
    q = np.asarray(q, dtype=float)
    if p.is_gaussian:
        return univariate._scalar_out(np.exp(lognorm - 0.5 * q))
    a = nu - dof
    out = np.empty(q.shape)
    pos = q > 0
    if np.any(pos):
        qp = q[pos]
        logf = (lognorm + math.log(2.0) + nu * math.log(nu) - math.lgamma(nu)
                + 0.5 * a * np.log(qp / (2.0 * nu))
                + special.log_bessel_k(a, np.sqrt(2.0 * nu * qp)))
        out[pos] = np.exp(logf)
    if np.any(~pos):
        if a > 0:
            out[~pos] = math.exp(lognorm + math.lgamma(a) + dof * math.log(nu) - math.lgamma(nu))
        else:
            out[~pos] = math.inf
    return univariate._scalar_out(out)


_CDF_PANELS = (0.0, 1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999, 1.0)
_GL16 = np.polynomial.legendre.leggauss(16)


def _gaussian_orthant(lower_mean, cov, x):
    """Pr{N(mean, cov) <= x} by the scipy Genz routine with tight tolerances."""
    k = len(x)
    if k == 1:
        return float(special.gaussian_q(-(x[0] - lower_mean[0]) / math.sqrt(cov[0, 0])))
    if k == 2:
        s = np.sqrt(np.diag(cov))
        r = cov[0, 1] / (s[0] * s[1])
        u = -(x - lower_mean) / s
        return float(special.gaussian_q_bivariate(u[0], u[1], r))
    # Fresh seeded frozen object per call keeps the randomized rule reproducible.
    mvn = multivariate_normal(mean=lower_mean, cov=cov, seed=12345)
    mvn.maxpts, mvn.abseps, mvn.releps = 20000 * k, 1e-8, 1e-7
    return float(mvn.cdf(x))


def _scaled_orthant(corr, u, g):
    """Pr{N(0, corr) <= u / sqrt(g)}, short-cutting the far tails."""
    if g <= 0:
        return float(np.all(u >= 0))
    v = u / math.sqrt(g)
    if np.any(v < -40.0):
        return 0.0
    if np.all(v > 40.0):
        return 1.0
    return _gaussian_orthant(np.zeros(len(u)), corr, v)


def _box_cdf(nu, mean, cov, x, cfg):
    """Pr{X <= x} for a real law given by (nu, mean, cov)."""
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainError("x must not be NaN")
    if np.any(x == -np.inf):
        return 0.0
    keep = np.isfinite(x)
    if not np.any(keep):
        return 1.0
    mean, cov, x = mean[keep], cov[np.ix_(keep, keep)], x[keep]
    n = as_normality(nu)
    s = np.sqrt(np.diag(cov))
    u = (x - mean) / s
    corr = cov / np.outer(s, s)
    k = len(x)
    if k == 1:
        return 1.0 - special.mcleish_q(n, u[0], cfg)
    offdiag = corr - np.eye(k)
    if np.max(np.abs(offdiag)) == 0.0:
        return special.mcleish_q_multivariate(n, -u, cfg)
    if k == 2:
        r = corr[0, 1]
        return min(1.0, max(0.0, 1.0 - special.mcleish_q(n, u[0], cfg) - special.mcleish_q(n, u[1], cfg)
                            + special.mcleish_q_bivariate(n, u[0], u[1], r, cfg)))
    if n.is_gaussian:
        return _gaussian_orthant(np.zeros(k), corr, u)
    # E_G[Phi_corr(u / sqrt G)] on a composite Gauss-Legendre rule in the
    # probability scale of G.
    total = 0.0
    for lo, hi in zip(_CDF_PANELS[:-1], _CDF_PANELS[1:]):
        t = 0.5 * (hi - lo) * (_GL16[0] + 1.0) + lo
        w = 0.5 * (hi - lo) * _GL16[1]
        g = special._gamma_quantile(n.nu, t)
        vals = [_scaled_orthant(corr, u, gi) for gi in g]
        total += float(np.dot(w, vals))
    return min(1.0, max(0.0, total))


def mv_cdf(p: MvMcLeishParams, x, cfg=None) -> float:
    """Pr{X <= x} componentwise; complex laws compare Re and Im parts separately.

    Diagonal covariances reduce to the multivariate Q-function and two real
    dimensions to the bivariate Q-function. Otherwise the Gaussian orthant
    probability is mixed over the Gamma variable.
    """
    x = _check_dim(p, x)
    mean, cov = p.real_embedding()
    if p.complex_valued:
        x = np.asarray(x, dtype=complex)
        xr = np.concatenate([x.real, x.imag])
    else:
        xr = np.asarray(x, dtype=float)
    return _box_cdf(p.nu, mean, cov, xr, cfg)


def mv_ccdf(p: MvMcLeishParams, x, cfg=None) -> float:
    """Pr{X > x} componentwise, by reflecting the law through the origin."""
    x = _check_dim(p, x)
    mean, cov = p.real_embedding()
    if p.complex_valued:
        x = np.asarray(x, dtype=complex)
        xr = np.concatenate([x.real, x.imag])
    else:
        xr = np.asarray(x, dtype=float)
    return _box_cdf(p.nu, -mean, cov, -xr, cfg)


def mv_mgf(p: MvMcLeishParams, s) -> float:
    """E[exp(-Re(s^H X))] = exp(-Re(s^H mean)) (1 - s^H cov s / (2 nu))^(-nu)."""
    s = _check_dim(p, s)
    if p.complex_valued:
        s = np.asarray(s, dtype=complex)
    else:
        s = np.asarray(s, dtype=float)
    quad = float(np.real(np.conj(s) @ p.cov @ s))
    inner = float(np.real(np.conj(s) @ p.mean))
    return math.exp(-inner + _mix_log_mgf(p.nu, quad))


def mv_affine(p: MvMcLeishParams, B, b=None) -> MvMcLeishParams:
    """Law of B X + b: same normality, mean B mean + b, covariance B cov B^H."""
    B = np.atleast_2d(np.asarray(B))
    if B.ndim != 2 or B.shape[1] != p.L:
        raise ValidationError("B must have %d columns" % p.L)
    if B.shape[0] > p.L or np.linalg.matrix_rank(B) < B.shape[0]:
        raise ValidationError("B must have full row rank")
    if np.iscomplexobj(B) and not p.complex_valued:
        raise ValidationError("a complex map needs a complex law")
    b = np.zeros(B.shape[0]) if b is None else np.atleast_1d(np.asarray(b))
    if b.shape != (B.shape[0],):
        raise ValidationError("b must have length %d" % B.shape[0])
    mean = B @ p.mean + b
    cov = B @ p.cov @ B.conj().T
    return MvMcLeishParams(p.nu, mean, cov, complex_valued=p.complex_valued)


def mv_condition(p: MvMcLeishParams, observed_idx, observed_val) -> MvMcLeishParams:
    """Location and dispersion of X_1 given X_2 = x_2 (real laws).

    The returned mean mu_1 + S_12 S_22^-1 (x_2 - mu_2) and dispersion
    S_11 - S_12 S_22^-1 S_21 are the exact conditional centre and shape of
    any elliptical law. The normality is carried over unchanged; the exact
    conditional mixing variable is not Gamma(nu) distributed, so the
    conditional spread is only matched on average.
    """
    if p.complex_valued:
        raise ValidationError("conditioning is provided for real laws only")
    idx = np.atleast_1d(np.asarray(observed_idx, dtype=int))
    val = np.atleast_1d(np.asarray(observed_val, dtype=float))
    if idx.size == 0 or idx.size >= p.L or len(set(idx.tolist())) != idx.size:
        raise ValidationError("observed_idx must be a proper, duplicate-free subset")
    if np.any(idx < 0) or np.any(idx >= p.L):
        raise ValidationError("observed_idx out of range")
    if val.shape != idx.shape:
        raise ValidationError("observed_val must match observed_idx")
    free = np.array([i for i in range(p.L) if i not in set(idx.tolist())])
    s11 = p.cov[np.ix_(free, free)]
    s12 = p.cov[np.ix_(free, idx)]
    s22 = p.cov[np.ix_(idx, idx)]
    try:
        c22 = sla.cho_factor(s22, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("observed block is singular") from exc
    mean = p.mean[free] + s12 @ sla.cho_solve(c22, val - p.mean[idx])
    cov = s11 - s12 @ sla.cho_solve(c22, s12.T)
    return MvMcLeishParams(p.nu, mean, cov)
