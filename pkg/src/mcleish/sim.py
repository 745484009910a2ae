"""Monte Carlo error-rate sweeps and sum-distribution experiments.

Each grid point draws from its own stream seeded by ``SeedSequence([seed,
point_index])`` and consumes it in fixed-size batches, so results are
bit-identical whether points run serially or in worker processes.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import binomtest

from . import analytic_error as ae
from .channel import (
    ChannelConfig,
    equalize_coherent,
    equalize_noncoherent,
    precoder_from_covariance,
    transmit,
    white_noise,
)
from .complex_mv import MvMcLeishParams, mv_sample
from .errors import ValidationError
from .modem import (
    Family,
    make_constellation,
    detect_dpsk,
    detect_map_coherent,
    detect_map_noncoherent,
    detect_ml_coherent,
    detect_ml_noncoherent,
)
from .special import as_normality
from .univariate import SumSpec, cdf, sample_mixing, sum_collapse, sum_sample

__all__ = [
    "Detector",
    "SweepConfig",
    "SweepPoint",
    "SweepResult",
    "AnalyticUnavailable",
    "run_sweep",
    "simulate_point",
    "wilson_ci",
    "SumExperiment",
    "run_sum_experiment",
    "parse_db_grid",
    "CSV_HEADER",
]

CSV_HEADER = ("snr_db", "analytic", "simulated", "errors", "trials", "ci_lo", "ci_hi")
BATCH = 1 << 17
MIN_TRIALS = 10_000
_COHERENT = {Family.BPSK, Family.BFSK, Family.OOK, Family.MASK, Family.MQAM_RECT,
             Family.MQAM_SQUARE, Family.MPSK}


class Detector(enum.Enum):
    ML = "ML"
    MAP = "MAP"


class AnalyticUnavailable(ValidationError):
    """No closed form exists for the requested family, detector and priors."""

    code = "analytic_unavailable"


def parse_db_grid(text: str) -> list:
    """Parse ``start:step:stop`` (inclusive) or a comma list of dB values."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
        else:
            vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError("SNR grid values must be numbers: %r" % text) from exc
    if ":" in text:
        if len(parts) != 3 or parts[1] <= 0 or parts[2] < parts[0]:
            raise ValidationError("grid must be start:step:stop with step > 0 and stop >= start")
        lo, step, hi = parts
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(n)]
    if not vals:
        raise ValidationError("empty SNR grid")
    return vals


@dataclass(frozen=True, eq=False)
class SweepConfig:
    """One SNR sweep.

    Parameters
    ----------
    family : Family or str
    M : int
    nu : float
    snr_db_grid : sequence of float
        Instantaneous SNR gamma = H^2 E_S / N0 in dB at each point.
    trials_per_point : int
        At least 10^4.
    seed : int
        Master seed.
    detector : Detector
    priors : sequence of float, optional
    correlated_sigma : array_like, optional
        Noise covariance; when given, symbols are precoded, sent through the
        correlated channel and equalized. Otherwise white noise with
        N0 = 1 is added directly to the equalized-domain signal.
    H, Theta : float
        Fading envelope and phase. Noncoherent families draw a fresh
        uniform phase per trial on top of ``Theta``.
    noiseless : bool
        Suppress the noise (sanity runs).
    M_I, M_Q, kappa : optional
        Rectangular QAM shape.
    L : int, optional
        Symbol vector dimension; defaults to the covariance size when
        ``correlated_sigma`` is given, else the family's base dimension.
    """

    family: Family
    M: int
    nu: float
    snr_db_grid: tuple
    trials_per_point: int
    seed: int
    detector: Detector = Detector.ML
    priors: Optional[tuple] = None
    correlated_sigma: Optional[np.ndarray] = None
    H: float = 1.0
    Theta: float = 0.0
    noiseless: bool = False
    M_I: Optional[int] = None
    M_Q: Optional[int] = None
    kappa: Optional[float] = None
    L: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "detector", Detector(self.detector) if not isinstance(self.detector, Detector)
                           else self.detector)
        object.__setattr__(self, "nu", as_normality(self.nu).nu)
        grid = tuple(float(v) for v in self.snr_db_grid)
        if not grid or not all(math.isfinite(v) for v in grid):
            raise ValidationError("snr_db_grid must be a non-empty list of finite values")
        object.__setattr__(self, "snr_db_grid", grid)
        if int(self.trials_per_point) != self.trials_per_point or self.trials_per_point < MIN_TRIALS:
            raise ValidationError("trials_per_point must be an integer >= %d" % MIN_TRIALS)
        object.__setattr__(self, "trials_per_point", int(self.trials_per_point))
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        object.__setattr__(self, "seed", int(self.seed))
        if self.priors is not None:
            object.__setattr__(self, "priors", tuple(float(p) for p in self.priors))
        if not (self.H > 0 and math.isfinite(self.H)):
            raise ValidationError("H must be positive for an SNR sweep")
        if self.correlated_sigma is not None:
            object.__setattr__(self, "correlated_sigma", np.asarray(self.correlated_sigma, dtype=complex))
        # build once to surface constellation errors at construction time
        self.constellation(1.0)

    def constellation(self, E_S):
        L = self.L
        if L is None and self.correlated_sigma is not None:
            L = self.correlated_sigma.shape[0]
        return make_constellation(self.family, self.M, E_S=E_S, L=L, M_I=self.M_I, M_Q=self.M_Q,
                                  kappa=self.kappa, priors=self.priors)

    @property
    def uniform(self) -> bool:
        return self.priors is None or len(set(self.priors)) == 1

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("M", "nu", "trials_per_point", "seed", "H", "Theta",
                                             "noiseless", "M_I", "M_Q", "kappa", "L")}
        d["family"] = self.family.value
        d["detector"] = self.detector.value
        d["snr_db_grid"] = list(self.snr_db_grid)
        d["priors"] = None if self.priors is None else list(self.priors)
        d["correlated"] = self.correlated_sigma is not None
        if math.isinf(d["nu"]):
            d["nu"] = "inf"
        return d


@dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    gamma: float
    analytic: float
    simulated: float
    errors: int
    trials: int
    ci_lo: float
    ci_hi: float
    wall_ns: int
    under_sampled: bool

    @property
    def stderr(self) -> float:
        p = self.analytic
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: SweepConfig
    points: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in self.points:
            w.writerow([repr(p.snr_db), repr(p.analytic), repr(p.simulated), p.errors, p.trials,
                        repr(p.ci_lo), repr(p.ci_hi)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"config": self.config.to_dict(), "points": [asdict(p) for p in self.points]},
                          indent=2)

    def write(self, path: str) -> None:
        text = self.to_json() if str(path).endswith(".json") else self.to_csv()
        with open(path, "w") as fh:
            fh.write(text)


def wilson_ci(errors: int, trials: int, level: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    ci = binomtest(int(errors), int(trials)).proportion_ci(level, method="wilson")
    return float(ci.low), float(ci.high)


# ------------------------------------------------------------ analytic side

def analytic_rate(cfg: SweepConfig, gamma: float) -> float:
    """Closed-form error probability matching the simulated configuration."""
    f = cfg.family
    nu = cfg.nu
    map_priors = cfg.detector is Detector.MAP and not cfg.uniform
    pri = cfg.priors
    if f is Family.MQAM_RECT:
        c = cfg.constellation(1.0)
        kappa = c.meta["kappa"]
    if map_priors:
        if f in (Family.BPSK, Family.BFSK):
            return ae.ber_binary_map(nu, gamma, pri, rho=-1.0 if f is Family.BPSK else 0.0)
        if f is Family.OOK:
            return ae.ber_binary_map(nu, gamma, pri, ook=True)
        if f is Family.NONCOH_ORTHOGONAL:
            return ae.ser_noncoherent_orthogonal_map(nu, [gamma] * cfg.M, pri)
        raise AnalyticUnavailable("no closed form for MAP detection of %s with unequal priors" % f.value)
    if not cfg.uniform and f in (Family.MASK, Family.MQAM_RECT, Family.MQAM_SQUARE, Family.MDPSK):
        # per-symbol error rates differ, so the prior-weighted rate has no single closed form
        raise AnalyticUnavailable("no closed form for %s with unequal priors under ML" % f.value)
    if f is Family.BPSK:
        return ae.ber_bpsk(nu, gamma)
    if f is Family.BFSK:
        return ae.ber_bfsk(nu, gamma)
    if f is Family.OOK:
        # ML ignores priors and both conditional errors equal Q(sqrt(gamma))
        return ae.ber_ook(nu, gamma)
    if f is Family.MASK:
        return ae.ser_mask(nu, gamma, cfg.M)
    if f is Family.MQAM_SQUARE:
        return ae.ser_mqam_square(nu, gamma, cfg.M)
    if f is Family.MQAM_RECT:
        return ae.ser_mqam_rect(nu, gamma, c.meta["M_I"], c.meta["M_Q"], kappa)
    if f is Family.MPSK:
        return ae.ser_mpsk(nu, gamma, cfg.M)
    if f is Family.NONCOH_ORTHOGONAL:
        return ae.ser_noncoherent_orthogonal(nu, gamma, cfg.M)
    if f is Family.MDPSK:
        return ae.ber_bdpsk(nu, gamma) if cfg.M == 2 else ae.ser_mdpsk(nu, gamma, cfg.M)
    raise AnalyticUnavailable(f.value)  # pragma: no cover


# ---------------------------------------------------------- simulated side

class _Link:
    """Noise and equalization for one point: white fast path or precoded correlated path."""

    def __init__(self, cfg: SweepConfig, L: int):
        self.nu = cfg.nu
        self.L = L
        self.noiseless = cfg.noiseless
        self.rot = complex(np.exp(1j * cfg.Theta))
        if cfg.correlated_sigma is None:
            self.chan = None
            self.N0 = 1.0
        else:
            sig = cfg.correlated_sigma
            if sig.shape != (L, L):
                raise ValidationError("correlated_sigma must be %d x %d for %s" % (L, L, cfg.family.value))
            self.chan = ChannelConfig(sig, cfg.nu, H=cfg.H, Theta=cfg.Theta, noiseless=cfg.noiseless)
            self.F = precoder_from_covariance(sig)
            self.N0 = self.chan.N0
            self._pair_law = None

    def _noise(self, n, rng, blocks=1):
        if self.noiseless:
            return np.zeros((n, blocks * self.L), dtype=complex)
        if self.chan is None:
            if blocks == 1:
                return white_noise(self.nu, self.L, n, self.N0, rng)
            g = sample_mixing(self.nu, n, rng)
            w = rng.standard_normal((n, blocks * self.L)) + 1j * rng.standard_normal((n, blocks * self.L))
            return math.sqrt(0.5 * self.N0) * np.sqrt(g)[:, None] * w
        if blocks == 1:
            return mv_sample(self.chan.noise_law, n, rng)
        if self._pair_law is None:
            sig = self.chan.Sigma
            big = np.zeros((blocks * self.L, blocks * self.L), dtype=complex)
            for b in range(blocks):
                big[b * self.L:(b + 1) * self.L, b * self.L:(b + 1) * self.L] = sig
            self._pair_law = MvMcLeishParams(self.nu, np.zeros(blocks * self.L, dtype=complex), big,
                                             complex_valued=True)
        return mv_sample(self._pair_law, n, rng)

    def receive(self, x, rng, H, theta, coherent, blocks=1):
        """Equalized observations of symbol rows ``x`` (n, blocks*L).

        ``theta`` is an optional per-row phase added to the configured
        fading phase (noncoherent families); the coherent receiver removes
        only the configured phase.
        """
        n = x.shape[0]
        if theta is not None:
            x = np.exp(1j * theta)[:, None] * x
        if self.chan is None:
            # equalized domain directly: R = H e^{j Theta} s + Z, Z ~ CM(0, (N0/2) I)
            r = H * self.rot * x + self._noise(n, rng, blocks)
            return np.conj(self.rot) * r if coherent else r
        eq = equalize_coherent if coherent else equalize_noncoherent
        if blocks == 1:
            return eq(self.chan, self.F, transmit(self.chan, self.F, x, rng))
        z = self._noise(n, rng, blocks)
        out = []
        for b in range(blocks):
            sl = slice(b * self.L, (b + 1) * self.L)
            rb = H * self.rot * (x[:, sl] @ self.F.T) + z[:, sl]
            out.append(eq(self.chan, self.F, rb))
        return np.concatenate(out, axis=1)


def simulate_point(cfg: SweepConfig, gamma: float, trials: int, rng) -> int:
    """Count symbol errors over ``trials`` transmissions at SNR ``gamma``."""
    c0 = cfg.constellation(1.0)
    link = _Link(cfg, c0.L)
    H = cfg.H
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    c = cfg.constellation(gamma * link.N0 / (H * H))
    use_map = cfg.detector is Detector.MAP
    errors = 0
    done = 0
    while done < trials:
        n = min(BATCH, trials - done)
        idx = rng.choice(c.M, size=n, p=c.priors) if not c.uniform else rng.integers(0, c.M, size=n)
        f = cfg.family
        if f in _COHERENT:
            x = c.symbols[idx]
            r = link.receive(x, rng, H, None, coherent=True)
            if use_map:
                d = detect_map_coherent(c, H, r, link.N0)
            else:
                d = detect_ml_coherent(c, H, r)
        elif f is Family.NONCOH_ORTHOGONAL:
            x = c.symbols[idx]
            theta = rng.uniform(-math.pi, math.pi, size=n)
            r = link.receive(x, rng, H, theta, coherent=False)
            det = detect_map_noncoherent if use_map else detect_ml_noncoherent
            d = det(c, H, r, link.N0)
        elif f is Family.MDPSK:
            ref = c.meta["carrier"]
            first = np.broadcast_to(ref, (n, c.L))
            second = ref[None, :] * np.exp(1j * c.phases[idx])[:, None]
            x = np.concatenate([first, second], axis=1)
            theta = rng.uniform(-math.pi, math.pi, size=n)
            r = link.receive(x, rng, H, theta, coherent=False, blocks=2)
            d = detect_dpsk(c, r[:, :c.L], r[:, c.L:], use_priors=use_map)
        else:  # pragma: no cover
            raise ValidationError("unsupported family")
        errors += int(np.count_nonzero(d.index != idx))
        done += n
    return errors


def _run_point(args):
    cfg, k = args
    snr_db = cfg.snr_db_grid[k]
    gamma = 10.0 ** (snr_db / 10.0)
    analytic = analytic_rate(cfg, gamma)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, k])))
    t0 = time.perf_counter_ns()
    errors = simulate_point(cfg, gamma, cfg.trials_per_point, rng)
    wall = time.perf_counter_ns() - t0
    n = cfg.trials_per_point
    lo, hi = wilson_ci(errors, n)
    return SweepPoint(snr_db, gamma, analytic, errors / n, errors, n, lo, hi, wall,
                      analytic * n < 10.0)


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """Simulate every grid point and attach the analytic error rate.

    Parameters
    ----------
    cfg : SweepConfig
    jobs : int
        Worker processes; results do not depend on it.
    """
    analytic_rate(cfg, 1.0)  # fail fast when no closed form exists
    tasks = [(cfg, k) for k in range(len(cfg.snr_db_grid))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            pts = list(ex.map(_run_point, tasks))
    else:
        pts = [_run_point(t) for t in tasks]
    return SweepResult(cfg, tuple(pts))


# ------------------------------------------------------ sum experiments

@dataclass(frozen=True, eq=False)
class SumExperiment:
    """Empirical law of a McLeish sum, with the analytic CDF when it collapses.

    ``grid`` and ``ecdf`` tabulate the empirical CDF. ``analytic_cdf`` and
    ``ks`` are None when the sum is not a single McLeish law.
    """

    n: int
    grid: np.ndarray
    ecdf: np.ndarray
    collapsed: object = None
    analytic_cdf: Optional[np.ndarray] = None
    ks: Optional[float] = None
    reason: str = ""


def _ks(sorted_x, F):
    n = sorted_x.size
    u = F(sorted_x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def run_sum_experiment(terms, n: int, seed, grid_points: int = 801) -> SumExperiment:
    """Sample a sum of independent McLeish variables and compare with its law.

    The KS statistic is exact over the sample, with the analytic CDF
    interpolated (monotone PCHIP) from ``grid_points`` quadrature evaluations
    placed at sample quantiles.
    """
    spec = terms if isinstance(terms, SumSpec) else SumSpec.of(terms)
    n = int(n)
    if n < 2:
        raise ValidationError("n must be at least 2")
    x = np.sort(sum_sample(spec, n, seed))
    grid = np.linspace(x[0], x[-1], grid_points)
    ecdf = np.searchsorted(x, grid, side="right") / n
    law = sum_collapse(spec)
    if not law:
        return SumExperiment(n, grid, ecdf, reason=law.reason)
    # knots at sample quantiles keep the CDF step between knots near 1/grid_points,
    # which matters at the density cusp of low-normality laws
    knots = np.unique(np.quantile(x, np.linspace(0.0, 1.0, grid_points)))
    if x[0] < law.mu < x[-1]:
        knots = np.union1d(knots, [law.mu])
    F = np.asarray(cdf(law, knots))
    F = np.maximum.accumulate(np.clip(F, 0.0, 1.0))
    interp = PchipInterpolator(knots, F, extrapolate=False)

    def Fx(v):
        return np.clip(np.nan_to_num(interp(v), nan=0.0), 0.0, 1.0)

    return SumExperiment(n, grid, ecdf, law, np.asarray(cdf(law, grid)), _ks(x, Fx))
