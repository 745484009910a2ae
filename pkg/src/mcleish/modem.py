"""Constellations and symbol detectors for the equalized AWMN channel.

All detectors break ties toward the smallest symbol index and accept a
single received vector (L,) or a batch (n, L). Symbol indices are 0-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError, ValidationError

__all__ = [
    "Family",
    "Constellation",
    "Decision",
    "make_constellation",
    "detect_map_coherent",
    "detect_ml_coherent",
    "detect_map_noncoherent",
    "detect_ml_noncoherent",
    "detect_dpsk",
    "detect_ml_correlated",
]

_CHUNK = 1 << 18


class Family(enum.Enum):
    BPSK = "BPSK"
    BFSK = "BFSK"
    OOK = "OOK"
    MASK = "MASK"
    MQAM_RECT = "MQAM_RECT"
    MQAM_SQUARE = "MQAM_SQUARE"
    MPSK = "MPSK"
    NONCOH_ORTHOGONAL = "NONCOH_ORTHOGONAL"
    MDPSK = "MDPSK"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper().replace("-", "_")
        aliases = {"ASK": "MASK", "PSK": "MPSK", "QAM": "MQAM_SQUARE", "DPSK": "MDPSK",
                   "NONCOHERENT": "NONCOH_ORTHOGONAL", "ORTHOGONAL": "NONCOH_ORTHOGONAL",
                   "BDPSK": "MDPSK", "RECT_QAM": "MQAM_RECT", "SQUARE_QAM": "MQAM_SQUARE"}
        key = aliases.get(key, key)
        try:
            return cls[key]
        except KeyError:
            raise ValidationError("unknown modulation family %r" % name) from None


@dataclass(frozen=True, eq=False)
class Constellation:
    """Symbol set with priors.

    ``symbols`` has shape (M, L). ``E_S`` is the design average energy at
    uniform priors; ``avg_energy`` is the prior-weighted energy actually in
    use. ``phases`` holds the transition phases of differential families.
    """

    family: Family
    M: int
    symbols: np.ndarray
    priors: np.ndarray
    E_S: float
    meta: dict = field(default_factory=dict)

    @property
    def L(self) -> int:
        return self.symbols.shape[1]

    @property
    def avg_energy(self) -> float:
        return float(self.priors @ np.sum(np.abs(self.symbols) ** 2, axis=1))

    @property
    def energies(self) -> np.ndarray:
        return np.sum(np.abs(self.symbols) ** 2, axis=1)

    @property
    def equal_energy(self) -> bool:
        e = self.energies
        return bool(np.all(np.abs(e - e[0]) <= 1e-12 * max(e[0], 1e-300)))

    @property
    def uniform(self) -> bool:
        return bool(np.all(self.priors == self.priors[0]))

    @property
    def phases(self) -> np.ndarray:
        return self.meta.get("phases")

    def min_distance(self) -> float:
        d = np.linalg.norm(self.symbols[:, None, :] - self.symbols[None, :, :], axis=2)
        return float(np.min(d[~np.eye(self.M, dtype=bool)]))


@dataclass(frozen=True, eq=False)
class Decision:
    """Detected symbol index (0-based) and the winning metric value.

    For batches both fields are arrays. ``degenerate`` marks inputs for
    which the decision statistic carried no information.
    """

    index: object
    metric: object
    degenerate: object = False


def _ask_levels(M, energy):
    delta = math.sqrt(12.0 * energy / (M * M - 1))
    return (np.arange(1, M + 1) - 0.5 * (M + 1)) * delta, delta


def _isqrt(m):
    r = math.isqrt(m)
    return r if r * r == m else None


def make_constellation(family, M: int = None, E_S: float = 1.0, L: int = None, kappa: float = None,
                       M_I: int = None, M_Q: int = None, priors=None) -> Constellation:
    """Build a constellation with average energy ``E_S`` at uniform priors.

    Parameters
    ----------
    family : Family or str
    M : int
        Number of symbols (fixed at 2 for the binary families).
    E_S : float
        Average symbol energy.
    L : int, optional
        Vector dimension. The base symbols (scalar for one-dimensional
        families, M-dimensional for orthogonal ones) are zero padded and
        spread by the unitary DFT of size L, which keeps energies and inner
        products. Default: the base dimension.
    kappa : float, optional
        Quadrature share of the energy for rectangular QAM.
    M_I, M_Q : int, optional
        Rail sizes for rectangular QAM; ``M = M_I * M_Q``.
    priors : array_like, optional
        Symbol probabilities; uniform by default.
    """
    fam = Family.parse(family)
    if not (E_S > 0 and math.isfinite(E_S)):
        raise DomainError("E_S must be positive")
    meta = {}
    if fam in (Family.BPSK, Family.BFSK, Family.OOK):
        if M not in (None, 2):
            raise ValidationError("%s is binary; M must be 2" % fam.value)
        M = 2
    if M is None and fam is Family.MQAM_RECT and M_I and M_Q:
        M = M_I * M_Q
    if M is None or int(M) != M or M < 2:
        raise ValidationError("M must be an integer >= 2")
    M = int(M)
    a = math.sqrt(E_S)

    if fam is Family.BPSK:
        sym = np.array([[a], [-a]], dtype=complex)
    elif fam is Family.BFSK:
        sym = a * np.eye(2, dtype=complex)
    elif fam is Family.OOK:
        sym = np.array([[0.0], [math.sqrt(2.0 * E_S)]], dtype=complex)
    elif fam is Family.MASK:
        lv, delta = _ask_levels(M, E_S)
        sym = lv[:, None].astype(complex)
        meta["delta"] = delta
    elif fam in (Family.MQAM_SQUARE, Family.MQAM_RECT):
        if fam is Family.MQAM_SQUARE:
            side = _isqrt(M)
            if side is None or side < 2:
                raise ValidationError("square QAM needs a square M >= 4")
            M_I = M_Q = side
            kappa = 0.5
        else:
            if M_I is None or M_Q is None:
                raise ValidationError("rectangular QAM needs M_I and M_Q")
            if M_I < 2 or M_Q < 2 or M_I * M_Q != M:
                raise ValidationError("rectangular QAM needs M = M_I * M_Q with both >= 2")
            if kappa is None:
                kappa = (M_Q * M_Q - 1) / (M_I * M_I + M_Q * M_Q - 2)
            if not 0.0 < kappa < 1.0:
                raise DomainError("kappa must lie in (0, 1)")
        li, di = _ask_levels(M_I, (1.0 - kappa) * E_S)
        lq, dq = _ask_levels(M_Q, kappa * E_S)
        grid = (li[:, None] + 1j * lq[None, :]).reshape(-1)
        sym = grid[:, None]
        meta.update(M_I=M_I, M_Q=M_Q, kappa=kappa, delta_I=di, delta_Q=dq)
    elif fam in (Family.MPSK, Family.MDPSK):
        ph = 2.0 * math.pi * np.arange(M) / M
        sym = (a * np.exp(1j * ph))[:, None]
        meta["phases"] = ph
        if fam is Family.MDPSK:
            meta["carrier"] = np.array([a], dtype=complex)
    elif fam is Family.NONCOH_ORTHOGONAL:
        sym = a * np.eye(M, dtype=complex)
    else:  # pragma: no cover - enum is exhaustive
        raise ValidationError("unsupported family")
    if L is not None and int(L) != sym.shape[1]:
        L = int(L)
        if L < sym.shape[1]:
            raise ValidationError("%s needs L >= %d" % (fam.value, sym.shape[1]))
        spread = np.fft.fft(np.eye(L)) / math.sqrt(L)
        pad = np.zeros((M, L), dtype=complex)
        pad[:, :sym.shape[1]] = sym
        sym = pad @ spread.T
        if "carrier" in meta:
            meta["carrier"] = spread[:, 0] * meta["carrier"][0]

    if priors is None:
        pr = np.full(M, 1.0 / M)
    else:
        pr = np.asarray(priors, dtype=float)
        if pr.shape != (M,) or np.any(pr <= 0) or abs(pr.sum() - 1.0) > 1e-12:
            raise DomainError("priors must be %d positive probabilities summing to 1" % M)
        pr = pr / pr.sum()
    e_uniform = float(np.mean(np.sum(np.abs(sym) ** 2, axis=1)))
    if abs(e_uniform - E_S) > 1e-12 * E_S:
        raise AssertionError("constellation energy %.17g != %.17g" % (e_uniform, E_S))
    sym.setflags(write=False)
    pr.setflags(write=False)
    return Constellation(fam, M, sym, pr, float(E_S), meta)


# ---------------------------------------------------------------- detectors

def _batch(r, L):
    r = np.asarray(r, dtype=complex)
    single = r.ndim == 1
    r2 = np.atleast_2d(r)
    if r2.ndim != 2 or r2.shape[1] != L:
        raise ValidationError("received vectors must have length %d" % L)
    return r2, single


def _finish(idx, met, single, degen=None):
    if degen is None:
        degen = np.zeros(idx.shape, dtype=bool)
    if single:
        return Decision(int(idx[0]), float(met[0]), bool(degen[0]))
    return Decision(idx, met, degen)


def _argmax_rows(metric_fn, r2, M):
    n = r2.shape[0]
    idx = np.empty(n, dtype=np.int64)
    met = np.empty(n)
    for lo in range(0, n, _CHUNK):
        m = metric_fn(r2[lo:lo + _CHUNK])
        k = np.argmax(m, axis=1)
        idx[lo:lo + _CHUNK] = k
        met[lo:lo + _CHUNK] = m[np.arange(m.shape[0]), k]
    return idx, met


def detect_map_coherent(c: Constellation, H: float, r_c, N0: float) -> Decision:
    """argmax_m  N0 log p_m + 2 H Re(s_m^H r) - H^2 ||s_m||^2."""
    r2, single = _batch(r_c, c.L)
    bias = N0 * np.log(c.priors) - H * H * c.energies
    sc = np.conj(c.symbols).T

    def metric(block):
        return bias[None, :] + 2.0 * H * np.real(block @ sc)

    return _finish(*_argmax_rows(metric, r2, c.M), single)


def detect_ml_coherent(c: Constellation, H: float, r_c, shortcut: bool = False) -> Decision:
    """Minimum-distance decision argmin_m ||r - H s_m||^2.

    With ``shortcut`` and an equal-energy constellation the decision is
    argmax_m Re(s_m^H r), which selects the same symbol. The metric reported
    is the negative squared distance (or the correlation for the shortcut).
    """
    r2, single = _batch(r_c, c.L)
    if shortcut:
        if not c.equal_energy:
            raise ValidationError("the correlation shortcut needs equal-energy symbols")
        sc = np.conj(c.symbols).T
        return _finish(*_argmax_rows(lambda b: np.real(b @ sc), r2, c.M), single)
    idx = np.asarray(_backend.nearest_index(r2, c.symbols, float(H)), dtype=np.int64)
    diff = r2 - H * c.symbols[idx]
    met = -np.sum(np.abs(diff) ** 2, axis=1)
    return _finish(idx, met, single)


def _envelope_weights(c, H, N0, use_priors):
    gam = H * H * c.energies / N0
    w = gam * c.priors if use_priors else gam.copy()
    return w


def _noncoherent(c, H, r_nc, N0, use_priors):
    r2, single = _batch(r_nc, c.L)
    w = _envelope_weights(c, H, N0, use_priors)
    sc = np.conj(c.symbols).T

    def metric(block):
        return w[None, :] * np.abs(block @ sc)

    idx, met = _argmax_rows(metric, r2, c.M)
    return _finish(idx, met, single, degen=met <= 0)


def detect_map_noncoherent(c: Constellation, H: float, r_nc, N0: float = 1.0) -> Decision:
    """Envelope detector argmax_m p_m gamma_m |s_m^H r| with gamma_m = H^2 ||s_m||^2 / N0."""
    return _noncoherent(c, H, r_nc, N0, True)


def detect_ml_noncoherent(c: Constellation, H: float, r_nc, N0: float = 1.0) -> Decision:
    """Envelope detector argmax_m gamma_m |s_m^H r|; argmax |s_m^H r| for equal energies."""
    return _noncoherent(c, H, r_nc, N0, False)


def detect_dpsk(c: Constellation, r1_nc, r2_nc, s=None, use_priors: bool = False,
                atol: float = 1e-300) -> Decision:
    """Differential phase decision from two consecutive equalized vectors.

    The phase difference Phi = arg(s^H r2) - arg(s^H r1) is compared with
    the transition phases through argmax_m w_m cos(Phi - phi_m), with
    ``w_m = p_m`` when ``use_priors`` and 1 otherwise. Inputs whose
    projections vanish are flagged as degenerate.
    """
    if c.family is not Family.MDPSK:
        raise ValidationError("detect_dpsk needs an MDPSK constellation")
    ref = c.meta["carrier"] if s is None else np.asarray(s, dtype=complex).reshape(-1)
    a, single = _batch(r1_nc, c.L)
    b, single2 = _batch(r2_nc, c.L)
    if a.shape != b.shape:
        raise ValidationError("r1 and r2 must have the same shape")
    p1 = a @ np.conj(ref)
    p2 = b @ np.conj(ref)
    degen = (np.abs(p1) <= atol) | (np.abs(p2) <= atol)
    phi = np.angle(p2 * np.conj(p1))
    w = np.asarray(c.priors) if use_priors else np.ones(c.M)
    ph = c.phases

    def metric_fn(idx):
        return w[None, :] * np.cos(phi[idx, None] - ph[None, :])

    n = phi.size
    idx = np.empty(n, dtype=np.int64)
    met = np.empty(n)
    for lo in range(0, n, _CHUNK):
        m = metric_fn(slice(lo, lo + _CHUNK))
        k = np.argmax(m, axis=1)
        idx[lo:lo + _CHUNK] = k
        met[lo:lo + _CHUNK] = m[np.arange(m.shape[0]), k]
    return _finish(idx, met, single and single2, degen)


def detect_ml_correlated(c: Constellation, H: float, Theta: float, F, Sigma, r) -> Decision:
    """Reference ML detector in the correlated domain.

    Minimises the Mahalanobis distance (r - H e^{j Theta} F s_m)^H Sigma^-1 (...)
    directly on the unequalized received vector. Because the noise density is
    a decreasing function of that distance this selects the same symbol as
    equalizing first and running detect_ml_coherent; it exists as an oracle
    for that equivalence and is not used on the fast path.
    """
    F = np.asarray(F, dtype=complex)
    Sigma = np.asarray(Sigma, dtype=complex)
    r2, single = _batch(r, c.L)
    chol = np.linalg.cholesky(Sigma)
    pts = H * np.exp(1j * Theta) * (c.symbols @ F.T)
    w_r = np.linalg.solve(chol, r2.T).T
    w_p = np.linalg.solve(chol, pts.T).T
    d = np.sum(np.abs(w_r[:, None, :] - w_p[None, :, :]) ** 2, axis=2)
    idx = np.argmin(d, axis=1)
    return _finish(idx, -d[np.arange(d.shape[0]), idx], single)
