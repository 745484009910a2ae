"""Special-case verification suites used by ``mcleish verify``.

``limits`` pins the Laplacian (nu = 1) and Gaussian (large nu) limits of the
Q-function and of every error-rate formula; ``reductions`` checks the
identities that tie the modulation families together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sps

from . import analytic_error as ae
from . import awgn_reference as ref
from .special import gaussian_q, laplacian_q, mcleish_q, mcleish_q_partial

__all__ = ["Check", "SUITES", "run_suite"]

GAUSS_NU = 1e4
_GAMMA_DB = np.linspace(0.0, 12.0, 13)


@dataclass(frozen=True)
class Check:
    name: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)

    def line(self) -> str:
        return "%s %s max_err=%.3e tol=%.1e" % ("PASS" if self.passed else "FAIL", self.name, self.error, self.tol)


def _max_err(pairs):
    return max(abs(a - b) for a, b in pairs)


def _gammas():
    return [10.0 ** (d / 10.0) for d in _GAMMA_DB]


def limits_suite():
    xs = np.linspace(-5.0, 5.0, 101)
    out = [
        Check("q_laplacian_nu1", _max_err((mcleish_q(1.0, x), laplacian_q(x)) for x in xs), 1e-10),
        Check("q_gaussian_nu1e4", _max_err((mcleish_q(GAUSS_NU, x), gaussian_q(x)) for x in xs), 1e-3),
    ]
    g = _gammas()
    nu = GAUSS_NU
    table = [
        ("bpsk", lambda y: ae.ber_bpsk(nu, y), ref.bpsk),
        ("bfsk", lambda y: ae.ber_bfsk(nu, y), ref.bfsk),
        ("ook", lambda y: ae.ber_ook(nu, y), ref.ook),
        ("mask4", lambda y: ae.ser_mask(nu, y, 4), lambda y: ref.mask(y, 4)),
        ("mask8", lambda y: ae.ser_mask(nu, y, 8), lambda y: ref.mask(y, 8)),
        ("qam16_square", lambda y: ae.ser_mqam_square(nu, y, 16), lambda y: ref.mqam_square(y, 16)),
        ("qam64_square", lambda y: ae.ser_mqam_square(nu, y, 64), lambda y: ref.mqam_square(y, 64)),
        ("qam8_rect", lambda y: ae.ser_mqam_rect(nu, y, 4, 2, 0.3), lambda y: ref.mqam_rect(y, 4, 2, 0.3)),
        ("psk8", lambda y: ae.ser_mpsk(nu, y, 8), lambda y: ref.mpsk(y, 8)),
        ("psk16", lambda y: ae.ser_mpsk(nu, y, 16), lambda y: ref.mpsk(y, 16)),
        ("noncoherent2", lambda y: ae.ser_noncoherent_orthogonal(nu, y, 2),
         lambda y: ref.noncoherent_orthogonal(y, 2)),
        ("noncoherent8", lambda y: ae.ser_noncoherent_orthogonal(nu, y, 8),
         lambda y: ref.noncoherent_orthogonal(y, 8)),
        ("dpsk4", lambda y: ae.ser_mdpsk(nu, y, 4), lambda y: ref.mdpsk(y, 4)),
        ("dpsk8", lambda y: ae.ser_mdpsk(nu, y, 8), lambda y: ref.mdpsk(y, 8)),
        ("bdpsk", lambda y: ae.ber_bdpsk(nu, y), ref.bdpsk),
    ]
    for name, f, r in table:
        out.append(Check("gaussian_limit_" + name, _max_err((f(y), r(y)) for y in g), 1e-3))
    # Laplacian special cases with elementary closed forms
    out.append(Check("ook_laplacian", _max_err((ae.ber_ook(1.0, y), laplacian_q(math.sqrt(y))) for y in g), 1e-10))
    out.append(Check("noncoherent2_laplacian",
                     _max_err((ae.ser_noncoherent_orthogonal(1.0, y, 2),
                               math.sqrt(y / 2.0) * sps.kv(1, math.sqrt(2.0 * y))) for y in g), 1e-12))
    out.append(Check("bdpsk_laplacian",
                     _max_err((ae.ber_bdpsk(1.0, y), math.sqrt(y) * sps.kv(1, 2.0 * math.sqrt(y))) for y in g),
                     1e-12))
    out.append(Check("bdpsk_zero_snr", abs(ae.ber_bdpsk(2.0, 1e-12) - 0.5), 1e-9))
    return out


def reductions_suite():
    nus = (0.5, 1.0, 4.0, math.inf)
    g = [10.0 ** (d / 10.0) for d in (-5.0, 0.0, 5.0, 10.0)]
    grid = [(nu, y) for nu in nus for y in g]
    tol = 1e-9
    return [
        Check("mask2_eq_bpsk", _max_err((ae.ser_mask(nu, y, 2), ae.ber_binary_coherent(nu, y, -1.0))
                                        for nu, y in grid), tol),
        Check("mpsk2_eq_bpsk", _max_err((ae.ser_mpsk(nu, y, 2), ae.ber_binary_coherent(nu, y, -1.0))
                                        for nu, y in grid), tol),
        Check("mpsk4_eq_qam4", _max_err((ae.ser_mpsk(nu, y, 4), ae.ser_mqam_square(nu, y, 4))
                                        for nu, y in grid), tol),
        Check("qam4_eq_partial_q", _max_err((ae.ser_mqam_square(nu, y, 4),
                                             mcleish_q_partial(nu, math.sqrt(y), 0.75 * math.pi))
                                            for nu, y in grid), tol),
        Check("rect_eq_square16", _max_err((ae.ser_mqam_rect(nu, y, 4, 4, 0.5), ae.ser_mqam_square(nu, y, 16))
                                           for nu, y in grid), tol),
        Check("rect_eq_square64", _max_err((ae.ser_mqam_rect(nu, y, 8, 8, 0.5), ae.ser_mqam_square(nu, y, 64))
                                           for nu, y in grid), tol),
        Check("mdpsk2_eq_bdpsk", _max_err((ae.ser_mdpsk(nu, y, 2), ae.ber_bdpsk(nu, y)) for nu, y in grid), tol),
        Check("bfsk_eq_ook", _max_err((ae.ber_bfsk(nu, y), ae.ber_ook(nu, y)) for nu, y in grid), tol),
        Check("map_uniform_eq_ml_binary",
              _max_err((ae.ber_binary_map(nu, y, (0.5, 0.5), rho=-1.0), ae.ber_bpsk(nu, y)) for nu, y in grid), tol),
        Check("noncoherent_map_uniform",
              _max_err((ae.ser_noncoherent_orthogonal_map(nu, [y] * M, [1.0 / M] * M),
                        ae.ser_noncoherent_orthogonal(nu, y, M)) for nu, y in grid for M in (2, 4, 8)), 1e-10),
        Check("zero_snr_levels",
              _max_err([(ae.ser_mask(1.0, 0.0, 4), 0.75), (ae.ser_mqam_square(1.0, 0.0, 16), 15 / 16),
                        (ae.ser_mqam_rect(1.0, 0.0, 4, 2, 0.3), 7 / 8), (ae.ser_mpsk(1.0, 0.0, 8), 7 / 8),
                        (ae.ber_bpsk(1.0, 0.0), 0.5)]), tol),
    ]


SUITES = {"limits": limits_suite, "reductions": reductions_suite}


def run_suite(name: str):
    """Run one suite; returns the list of Check results."""
    return SUITES[name]()
