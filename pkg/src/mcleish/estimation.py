"""Method-of-moments fitting and noise-variance stability analysis.

The variance of a noise trace is tracked with a sliding window of ``W``
samples. Its drift is summarised by the Allan variance of that sequence,
taken over consecutive disjoint windows, and compared with its overall
spread through R(W) = 1 - Allan / Var. The coherence window is the time span
over which R falls to a chosen level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    DomainError,
    InsufficientDataError,
    NumericalError,
    SubGaussianKurtosisError,
    ValidationError,
)
from .univariate import McLeishParams

__all__ = [
    "NU_MIN",
    "NU_MAX",
    "CONSTANT_FACTOR",
    "MIN_ALLAN_PAIRS",
    "GRID_MIN_PAIRS",
    "FitReport",
    "NoiseTrace",
    "UncertaintyClass",
    "VarianceStabilityReport",
    "nu_from_kurtosis",
    "fit_mom",
    "fit_mom_report",
    "windowed_variance",
    "allan_variance",
    "var_of_var",
    "variance_autocorr",
    "max_window",
    "window_grid",
    "coherence_window",
    "classify_uncertainty",
    "stability_report",
    "read_trace",
]

NU_MIN = 1e-3
NU_MAX = 1e6
CONSTANT_FACTOR = 100.0
MIN_ALLAN_PAIRS = 8
GRID_MIN_PAIRS = 32
_FLAT_REL = 1e-12


# ------------------------------------------------------------------ fitting

def nu_from_kurtosis(kurt: float) -> float:
    """Normality 3 / (kurt - 3) clamped to [NU_MIN, NU_MAX].

    Raises
    ------
    SubGaussianKurtosisError
        When ``kurt <= 3``.
    """
    kurt = float(kurt)
    if not kurt > 3.0:
        raise SubGaussianKurtosisError(
            "sample kurtosis %.6g is not above 3; normality is undefined" % kurt, kurtosis=kurt
        )
    return min(NU_MAX, max(NU_MIN, 3.0 / (kurt - 3.0)))


@dataclass(frozen=True)
class FitReport:
    params: McLeishParams
    kurtosis: float
    n: int
    clamped: bool
    warnings: tuple = ()


def fit_mom_report(samples, allow_gaussian: bool = False) -> FitReport:
    """Moment fit with diagnostics; see fit_mom.

    With ``allow_gaussian`` a sample kurtosis at or below 3 yields the
    Gaussian limit (nu = inf) and a warning instead of an error. A warning is
    also attached whenever the excess kurtosis is within two standard errors
    (sqrt(24/n)) of zero, since the normality is then poorly determined.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 100:
        raise InsufficientDataError("moment fitting needs at least 100 samples, got %d" % x.size)
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    mu = float(np.mean(x))
    s2 = float(np.var(x, ddof=1))
    if not s2 > 0:
        raise DomainError("samples have zero variance")
    kurt = float(stats.kurtosis(x, fisher=False, bias=False))
    notes = []
    if kurt - 3.0 < 2.0 * math.sqrt(24.0 / x.size):
        notes.append("excess kurtosis %.3g is within sampling noise of a Gaussian" % (kurt - 3.0))
    if kurt <= 3.0 and allow_gaussian:
        notes.append("sub-Gaussian sample kurtosis %.6g; reporting the Gaussian limit" % kurt)
        return FitReport(McLeishParams(math.inf, mu, s2), kurt, int(x.size), True, tuple(notes))
    nu = nu_from_kurtosis(kurt)
    raw = 3.0 / (kurt - 3.0)
    clamped = raw != nu
    if clamped:
        notes.append("normality clamped to [%g, %g]" % (NU_MIN, NU_MAX))
    return FitReport(McLeishParams(nu, mu, s2), kurt, int(x.size), clamped, tuple(notes))


def fit_mom(samples) -> McLeishParams:
    """Fit (nu, mu, sigma2) by matching mean, variance and kurtosis.

    Uses the bias-corrected sample kurtosis ``K`` and ``nu = 3 / (K - 3)``.

    Raises
    ------
    InsufficientDataError
        Fewer than 100 samples.
    SubGaussianKurtosisError
        Sample kurtosis at or below 3.
    """
    return fit_mom_report(samples).params


# ------------------------------------------------------ variance tracking

@dataclass(frozen=True, eq=False)
class NoiseTrace:
    """Noise samples (real or complex) taken every ``tau0`` seconds."""

    samples: np.ndarray
    tau0: float = 1.0

    def __post_init__(self):
        z = np.asarray(self.samples)
        if z.ndim != 1:
            raise ValidationError("a trace is one-dimensional")
        if z.size < 16:
            raise InsufficientDataError("a trace needs at least 16 samples")
        z = np.array(z, dtype=complex if np.iscomplexobj(z) else float)
        if not np.all(np.isfinite(z)):
            raise DomainError("trace samples must be finite")
        if not (self.tau0 > 0 and math.isfinite(self.tau0)):
            raise DomainError("tau0 must be positive")
        z.setflags(write=False)
        object.__setattr__(self, "samples", z)
        object.__setattr__(self, "tau0", float(self.tau0))

    def __len__(self):
        return self.samples.size

    def window(self, tau: float) -> int:
        """Number of samples spanned by ``tau`` (floor of tau / tau0)."""
        if not tau > 0:
            raise DomainError("tau must be positive")
        return int(math.floor(tau / self.tau0 + 1e-9))


def _window_of(trace, tau):
    w = trace.window(tau)
    if w < 2:
        raise DomainError("window must span at least 2 samples (tau >= 2 tau0)")
    if w > len(trace):
        raise InsufficientDataError("window longer than the trace")
    return w


def _sliding_variance(z, w):
    z = z - np.mean(z)
    c1 = np.concatenate([[0.0], np.cumsum(z)])
    c2 = np.concatenate([[0.0], np.cumsum(np.abs(z) ** 2)])
    s1 = (c1[w:] - c1[:-w]) / w
    s2 = (c2[w:] - c2[:-w]) / w
    return np.maximum(s2 - np.abs(s1) ** 2, 0.0)


def windowed_variance(trace: NoiseTrace, tau: float) -> np.ndarray:
    """Sliding-window variance sequence, stride one sample.

    Entry ``n`` is (1/W) sum |z_k - m_n|^2 over the window starting at
    ``n``, with ``m_n`` the window mean and ``W = floor(tau / tau0)``.
    """
    w = _window_of(trace, tau)
    return _sliding_variance(trace.samples, w)


def _disjoint(seq, w):
    return seq[::w]


def allan_variance(trace: NoiseTrace, tau: float) -> float:
    """Half the mean squared difference of consecutive disjoint window variances.

    Raises
    ------
    InsufficientDataError
        Fewer than MIN_ALLAN_PAIRS disjoint pairs fit in the trace.
    """
    w = _window_of(trace, tau)
    seq = _disjoint(_sliding_variance(trace.samples, w), w)
    if seq.size - 1 < MIN_ALLAN_PAIRS:
        raise InsufficientDataError(
            "Allan variance at W=%d needs %d disjoint pairs; trace gives %d"
            % (w, MIN_ALLAN_PAIRS, seq.size - 1)
        )
    return float(0.5 * np.mean(np.diff(seq) ** 2))


def var_of_var(trace: NoiseTrace, tau: float) -> float:
    """Variance of the sliding-window variance sequence."""
    return float(np.var(windowed_variance(trace, tau)))


def _degenerate(seq, v):
    scale = float(np.mean(seq)) ** 2
    return v <= _FLAT_REL * max(scale, 1e-300)


def _autocorr_from(seq, w):
    v = float(np.var(seq))
    d = _disjoint(seq, w)
    if d.size - 1 < MIN_ALLAN_PAIRS:
        raise InsufficientDataError("not enough disjoint windows at W=%d" % w)
    a = float(0.5 * np.mean(np.diff(d) ** 2))
    if _degenerate(seq, v):
        return 1.0, a, v
    r = 1.0 - a / v
    return min(1.0, max(-1.0, r)), a, v


def variance_autocorr(trace: NoiseTrace, tau: float) -> float:
    """Correlation R = 1 - Allan / Var of window variances ``tau`` apart.

    Clamped to [-1, 1]. A variance sequence with no spread (relative
    variance below 1e-12) is perfectly stable and returns 1.
    """
    w = _window_of(trace, tau)
    return _autocorr_from(_sliding_variance(trace.samples, w), w)[0]


def _pairs(n, w):
    # The sliding sequence has n - w + 1 entries; every w-th one is kept.
    return -(-(n - w + 1) // w) - 1


def max_window(n: int, pairs: int = MIN_ALLAN_PAIRS) -> int:
    """Largest window leaving ``pairs`` disjoint pairs in ``n`` samples."""
    w = max(2, (n + 1) // (pairs + 2))
    while w > 2 and _pairs(n, w) < pairs:
        w -= 1
    while _pairs(n, w + 1) >= pairs:
        w += 1
    return w


def window_grid(trace: NoiseTrace, points: int = 40, pairs: int = GRID_MIN_PAIRS) -> np.ndarray:
    """Log-spaced integer windows from 2 up to max_window(len(trace), pairs).

    The default keeps at least GRID_MIN_PAIRS disjoint pairs at the largest
    window so every grid point has a usable Allan estimate; short traces
    fall back to MIN_ALLAN_PAIRS.
    """
    n = len(trace)
    top = max_window(n, pairs)
    if top < 4 and pairs > MIN_ALLAN_PAIRS:
        top = max_window(n, MIN_ALLAN_PAIRS)
    if _pairs(n, top) < MIN_ALLAN_PAIRS:
        raise InsufficientDataError("trace too short for a window grid")
    w = np.unique(np.round(np.geomspace(2, top, points)).astype(int))
    return w


class UncertaintyClass(enum.Enum):
    CONSTANT_VARIANCE = "ConstantVariance"
    SLOW_UNCERTAINTY = "SlowUncertainty"
    FAST_UNCERTAINTY = "FastUncertainty"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class VarianceStabilityReport:
    window_grid: np.ndarray
    allan: np.ndarray
    var_of_var: np.ndarray
    autocorr: np.ndarray
    coherence_window: float
    uncertainty_class: UncertaintyClass
    r_level: float = 0.5

    def rows(self):
        """(tau, allan, var_of_var, autocorr) tuples, one per grid point."""
        return list(zip(self.window_grid.tolist(), self.allan.tolist(),
                        self.var_of_var.tolist(), self.autocorr.tolist()))


def _curves(trace, windows):
    allan, vov, r = [], [], []
    for w in windows:
        seq = _sliding_variance(trace.samples, int(w))
        ri, ai, vi = _autocorr_from(seq, int(w))
        allan.append(ai)
        vov.append(vi)
        r.append(ri)
    return np.array(allan), np.array(vov), np.array(r)


def _pick_window(windows, r, r_level):
    if np.all(r >= r_level):
        return int(windows[-1])
    obj = (r_level - r) ** 2
    if obj.size > 1 and np.all(obj == obj[0]):
        raise NumericalError("coherence objective is flat over the window grid")
    return int(windows[int(np.argmin(obj))])


def coherence_window(trace: NoiseTrace, r_level: float = 0.5, windows=None) -> float:
    """Coherence window tau_C (seconds) at correlation level ``r_level``.

    Minimises (R(tau) - r_level)^2 over a log-spaced window grid, smallest
    window first on ties. When R stays at or above ``r_level`` over the whole
    grid the variance is coherent beyond the observation and the largest
    grid window is returned.
    """
    if not 0.0 < r_level < 1.0:
        raise DomainError("r_level must lie in (0, 1)")
    windows = window_grid(trace) if windows is None else np.asarray(windows, dtype=int)
    _, _, r = _curves(trace, windows)
    return _pick_window(windows, r, r_level) * trace.tau0


def classify_uncertainty(tau_c: float, t_coherence: float, t_symbol: float,
                         factor: float = CONSTANT_FACTOR) -> UncertaintyClass:
    """Label the variance behaviour from r = tau_c / t_coherence.

    r > factor * t_symbol is constant variance, r >= t_symbol slow
    uncertainty, anything smaller fast uncertainty.
    """
    for name, v in (("tau_c", tau_c), ("t_coherence", t_coherence), ("t_symbol", t_symbol)):
        if not (v > 0 and math.isfinite(v)):
            raise DomainError("%s must be positive" % name)
    r = tau_c / t_coherence
    if r > factor * t_symbol:
        return UncertaintyClass.CONSTANT_VARIANCE
    if r >= t_symbol:
        return UncertaintyClass.SLOW_UNCERTAINTY
    return UncertaintyClass.FAST_UNCERTAINTY


def stability_report(trace: NoiseTrace, r_level: float = 0.5, t_coherence: float = None,
                     t_symbol: float = None, windows=None) -> VarianceStabilityReport:
    """Allan, spread and correlation curves plus the coherence window and class.

    ``t_coherence`` and ``t_symbol`` default to the sample period.
    """
    if not 0.0 < r_level < 1.0:
        raise DomainError("r_level must lie in (0, 1)")
    windows = window_grid(trace) if windows is None else np.asarray(windows, dtype=int)
    allan, vov, r = _curves(trace, windows)
    tau_c = _pick_window(windows, r, r_level) * trace.tau0
    tc = trace.tau0 if t_coherence is None else t_coherence
    ts = trace.tau0 if t_symbol is None else t_symbol
    cls = classify_uncertainty(tau_c, tc, ts)
    return VarianceStabilityReport(windows * trace.tau0, allan, vov, r, tau_c, cls, r_level)


# ---------------------------------------------------------------- ingestion

def read_trace(path, fmt: str = "csv", complex_valued: bool = None) -> np.ndarray:
    """Load samples from CSV (``re`` or ``re,im`` per line) or raw binary.

    Binary files hold little-endian float64 values, interleaved re,im when
    ``complex_valued`` is true.
    """
    if fmt == "csv":
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        except ValueError:
            data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#", skiprows=1)
        if data.shape[1] == 1:
            if complex_valued:
                raise ValidationError("complex trace requested but file has one column")
            return data[:, 0]
        if data.shape[1] == 2:
            return data[:, 0] + 1j * data[:, 1]
        raise ValidationError("CSV traces have one (re) or two (re,im) columns")
    if fmt in ("bin", "binary", "f64"):
        raw = np.fromfile(path, dtype="<f8")
        if complex_valued:
            if raw.size % 2:
                raise ValidationError("interleaved complex data needs an even value count")
            return raw[0::2] + 1j * raw[1::2]
        return raw
    raise ValidationError("unknown trace format %r" % fmt)
