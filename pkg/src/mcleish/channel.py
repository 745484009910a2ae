"""Additive white McLeish noise (AWMN) vector channel.

The transmitter precodes with ``F = sqrt(2 / N0) D`` where ``Sigma = D D^H``
and ``N0 = E[Z^H Z] / L = 2 trace(Sigma) / L`` is the total (real plus
imaginary) noise variance per component, so that ``Sigma = (N0 / 2) F F^H``. The
receiver applies ``F^-1`` (and the phase rotation for coherent reception),
which turns correlated noise with covariance ``Sigma`` into white noise with
covariance ``(N0 / 2) I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .complex_mv import MvMcLeishParams, mv_sample
from .errors import DomainError, ValidationError
from .special import Normality
from .univariate import _rng, sample_mixing

__all__ = [
    "ChannelConfig",
    "precoder_from_covariance",
    "transmit",
    "equalize_coherent",
    "equalize_noncoherent",
    "white_noise",
]


def _as_hermitian_pd(sigma):
    s = np.atleast_2d(np.asarray(sigma, dtype=complex))
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValidationError("Sigma must be a square matrix")
    return MvMcLeishParams(math.inf, np.zeros(s.shape[0], dtype=complex), s, complex_valued=True)


@dataclass(frozen=True, eq=False)
class ChannelConfig:
    """Channel state for one run.

    Parameters
    ----------
    Sigma : array_like, shape (L, L)
        Hermitian positive definite noise covariance (of the real parts).
    nu : float
        Noise normality.
    H : float
        Fading envelope, held constant over a run.
    Theta : float
        Fading phase in [-pi, pi).
    noiseless : bool
        Skip the noise draw entirely (the point-mass limit of the noise law).
    """

    Sigma: np.ndarray
    nu: float
    H: float = 1.0
    Theta: float = 0.0
    noiseless: bool = False
    _law: MvMcLeishParams = field(init=False, repr=False)

    def __post_init__(self):
        law = _as_hermitian_pd(self.Sigma)
        object.__setattr__(self, "Sigma", law.cov)
        object.__setattr__(self, "nu", Normality(self.nu).nu)
        if not (self.H >= 0 and math.isfinite(self.H)):
            raise DomainError("H must be non-negative")
        th = float(self.Theta)
        if not -math.pi <= th < math.pi:
            raise DomainError("Theta must lie in [-pi, pi)")
        object.__setattr__(self, "H", float(self.H))
        object.__setattr__(self, "Theta", th)
        object.__setattr__(self, "_law", MvMcLeishParams(self.nu, law.mean, law.cov, complex_valued=True))

    @property
    def L(self) -> int:
        return self.Sigma.shape[0]

    @property
    def N0(self) -> float:
        """Total noise variance per component, 2 trace(Sigma) / L."""
        return 2.0 * float(np.real(np.trace(self.Sigma))) / self.L

    @property
    def noise_law(self) -> MvMcLeishParams:
        return self._law

    @classmethod
    def white(cls, L, nu, N0=1.0, **kw) -> "ChannelConfig":
        """Uncorrelated channel with Sigma = (N0 / 2) I."""
        return cls(0.5 * N0 * np.eye(L), nu, **kw)


def precoder_from_covariance(Sigma) -> np.ndarray:
    """Lower-triangular precoder F = sqrt(2 / N0) chol(Sigma) = sqrt(L / trace(Sigma)) chol(Sigma)."""
    law = _as_hermitian_pd(Sigma)
    n0 = 2.0 * float(np.real(np.trace(law.cov))) / law.L
    return math.sqrt(2.0 / n0) * np.array(law.chol)


def _check_vectors(x, L, what):
    x = np.asarray(x, dtype=complex)
    if x.shape[-1:] != (L,) or x.ndim > 2:
        raise ValidationError("%s must have shape (%d,) or (n, %d)" % (what, L, L))
    return x


def transmit(cfg: ChannelConfig, F, s, seed) -> np.ndarray:
    """Received vectors H e^{j Theta} F s + z with z ~ CM_nu(0, Sigma).

    ``s`` may hold one symbol vector (L,) or a batch (n, L).
    """
    F = np.asarray(F, dtype=complex)
    if F.shape != (cfg.L, cfg.L):
        raise ValidationError("F must be %d x %d" % (cfg.L, cfg.L))
    s = _check_vectors(s, cfg.L, "s")
    clean = cfg.H * np.exp(1j * cfg.Theta) * (s @ F.T)
    if cfg.noiseless:
        return clean
    n = 1 if s.ndim == 1 else s.shape[0]
    z = mv_sample(cfg.noise_law, n, _rng(seed))
    return clean + (z[0] if s.ndim == 1 else z)


def _apply_inverse(F, r):
    F = np.asarray(F, dtype=complex)
    L = F.shape[0]
    r = _check_vectors(r, L, "r")
    rhs = np.atleast_2d(r).T
    if np.all(np.triu(F, 1) == 0) and np.any(np.abs(np.diag(F)) == 0):
        raise ValidationError("precoder is singular")
    try:
        if np.all(np.triu(F, 1) == 0):
            out = sla.solve_triangular(F, rhs, lower=True, check_finite=False)
        else:
            out = sla.solve(F, rhs)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ValidationError("precoder is singular") from exc
    out = out.T
    return out[0] if r.ndim == 1 else out


def equalize_noncoherent(cfg: ChannelConfig, F, r) -> np.ndarray:
    """R_nc = F^-1 r, leaving the fading phase on the signal."""
    return _apply_inverse(F, r)


def equalize_coherent(cfg: ChannelConfig, F, r) -> np.ndarray:
    """R_c = e^{-j Theta} F^-1 r = H s + Z_c."""
    return np.exp(-1j * cfg.Theta) * _apply_inverse(F, r)


def white_noise(nu, L: int, n: int, N0: float, rng) -> np.ndarray:
    """Draw ``n`` white noise vectors CM_nu(0, (N0/2) I); shape (n, L).

    Shortcut for the equalized noise that skips the precoding round trip.
    """
    rng = _rng(rng)
    g = sample_mixing(nu, n, rng)
    w = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
    return math.sqrt(0.5 * N0) * np.sqrt(g)[:, None] * w
