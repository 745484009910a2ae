"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 numerical
failure. Errors are reported on stderr as one JSON line ``{"code", "message"}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import complex_mv as cmv
from . import estimation as est
from . import univariate as uv
from .errors import McLeishError, NumericalError, ValidationError

EXIT_OK, EXIT_VERIFY, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report("usage", message)
        sys.exit(EXIT_VALIDATION)


def _report(code, message):
    sys.stderr.write(json.dumps({"code": code, "message": str(message)}) + "\n")


def _nu(text):
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError("nu must be a positive number or 'inf'") from None


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError("expected a comma-separated list of numbers, got %r" % text) from None


def _complexes(text):
    try:
        return [complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError("expected a comma-separated list of (complex) numbers, got %r" % text) from None


def _read_matrix(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([complex(v.strip().replace(" ", "")) for v in line.split(",")])
    m = np.array(rows, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("covariance file must hold a square matrix")
    return m


def _emit(args, payload, rows=None, header=None):
    """Write ``rows`` as CSV or ``payload`` as JSON to --out or stdout."""
    out = open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout
    try:
        if getattr(args, "format", "csv") == "json" or rows is None:
            out.write(json.dumps(payload, default=_json_default) + "\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            if header:
                w.writerow(header)
            w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def _fmt(v):
    return repr(float(v))


def _fmt_point(x):
    """CSV cell for an evaluation point; vectors are joined with ';'."""
    if np.ndim(x) > 0:
        return ";".join(_fmt_point(v) for v in np.asarray(x).ravel())
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x)).strip("()")
    return repr(x.item() if hasattr(x, "item") else x)


# ------------------------------------------------------------------- dist

def _dist_law(args):
    if args.cov_file:
        cov = _read_matrix(args.cov_file)
        complex_valued = args.complex or np.iscomplexobj(cov) and np.any(cov.imag != 0)
        L = cov.shape[0]
        mean = np.zeros(L) if args.mean is None else np.asarray(_complexes(args.mean))
        if mean.shape != (L,):
            raise ValidationError("--mean must have %d entries" % L)
        if not complex_valued:
            cov = cov.real
            mean = mean.real
        return "mv", cmv.MvMcLeishParams(args.nu, mean, cov, complex_valued=bool(complex_valued))
    if args.complex or args.rho is not None:
        mu = complex(args.mu_c) if args.mu_c else complex(args.mu)
        return "complex", cmv.ComplexMcLeishParams(args.nu, mu, args.sigma2, args.rho or 0.0)
    return "real", uv.McLeishParams(args.nu, args.mu, args.sigma2)


def _points(args, kind, L=1, law_complex=True):
    if args.x is None:
        raise ValidationError("--x is required")
    if kind == "real":
        return _floats(args.x)
    vals = _complexes(args.x)
    if kind == "complex":
        return vals
    if not law_complex:
        vals = [v.real for v in vals]
    if len(vals) != L:
        raise ValidationError("--x must have %d entries for this law" % L)
    return [np.asarray(vals)]


def cmd_dist(args):
    kind, law = _dist_law(args)
    op = args.op
    if op == "sample":
        if args.seed is None:
            raise ValidationError("--seed is required for sampling")
        if args.n is None:
            raise ValidationError("--n is required for sampling")
        if kind == "real":
            x = uv.sample(law, args.n, args.seed)
            rows = [[_fmt(v)] for v in x]
            header = ["x"]
        elif kind == "complex":
            x = cmv.complex_sample(law, args.n, args.seed)
            rows = [[_fmt(v.real), _fmt(v.imag)] for v in x]
            header = ["re", "im"]
        else:
            x = cmv.mv_sample(law, args.n, args.seed)
            if law.complex_valued:
                rows = [[_fmt(c) for v in r for c in (v.real, v.imag)] for r in x]
                header = [h for i in range(law.L) for h in ("re%d" % i, "im%d" % i)]
            else:
                rows = [[_fmt(v) for v in r] for r in x]
                header = ["x%d" % i for i in range(law.L)]
        payload = {"n": int(args.n), "samples": x}
        _emit(args, payload, rows, header if args.header else None)
        return EXIT_OK
    if op == "moment" and kind == "mv":
        raise ValidationError("moment is available for real and circular complex laws only")
    if op == "mgf":
        if args.s is None:
            raise ValidationError("--s is required")
        if kind == "real":
            s = _floats(args.s)
            vals = [uv.mgf(law, v) for v in s]
        elif kind == "complex":
            s = _complexes(args.s)
            vals = [cmv.ces_mgf(law, v) for v in s]
        else:
            s = np.asarray(_complexes(args.s))
            s = [s if law.complex_valued else s.real]
            vals = [cmv.mv_mgf(law, s[0])]
        return _values(args, "s", s, vals)
    if op == "moment":
        if args.k is None:
            raise ValidationError("--k (moment order) is required")
        if kind == "real":
            fn = uv.central_moment if args.central else uv.moment
            return _values(args, "k", [args.k], [fn(law, args.k)])
        m, n = args.k, args.l or 0
        return _values(args, "k", [args.k], [cmv.ccs_joint_moment(law, m, n)])
    pts = _points(args, kind, getattr(law, "L", 1), getattr(law, "complex_valued", True))
    if kind == "real":
        fn = {"pdf": uv.pdf, "cdf": uv.cdf, "ccdf": uv.ccdf}[op]
        vals = [fn(law, v) for v in pts]
    elif kind == "complex":
        fn = {"pdf": cmv.ces_pdf, "cdf": cmv.ces_cdf,
              "ccdf": lambda p, z: 1.0 - cmv.ces_cdf(p, z)}[op]
        vals = [float(fn(law, v)) for v in pts]
    else:
        fn = {"pdf": cmv.mv_pdf, "cdf": cmv.mv_cdf, "ccdf": cmv.mv_ccdf}[op]
        vals = [float(fn(law, v)) for v in pts]
    return _values(args, "x", pts, vals)


def _values(args, label, xs, vals):
    if args.format == "json":
        _emit(args, {label: xs, "value": vals})
    else:
        _emit(args, None, [[_fmt_point(x), _fmt(v)] for x, v in zip(xs, vals)],
              [label, "value"] if args.header else None)
    return EXIT_OK


# -------------------------------------------------------------- fit, allan

def _load(args):
    return est.read_trace(args.input, args.input_format, complex_valued=args.complex or None)


def cmd_fit(args):
    data = _load(args)
    if np.iscomplexobj(data):
        data = np.concatenate([data.real, data.imag])
    rep = est.fit_mom_report(data, allow_gaussian=True)
    p = rep.params
    payload = {"nu": p.nu if math.isfinite(p.nu) else "inf", "mu": p.mu, "sigma2": p.sigma2,
               "kurtosis": rep.kurtosis, "n": rep.n, "clamped": rep.clamped, "warnings": list(rep.warnings)}
    if args.format == "json":
        _emit(args, payload)
    else:
        _emit(args, None, [[k, v if not isinstance(v, list) else ";".join(v)] for k, v in payload.items()],
              ["field", "value"])
    return EXIT_OK


def cmd_allan(args):
    trace = est.NoiseTrace(_load(args), args.tau0)
    rep = est.stability_report(trace, args.r_level, args.tc, args.ts)
    summary = {"coherence_window": rep.coherence_window, "uncertainty_class": rep.uncertainty_class.value,
               "r_level": rep.r_level}
    if args.format == "json":
        payload = dict(summary)
        payload["rows"] = [dict(zip(("tau", "allan", "var_of_var", "autocorr"), r)) for r in rep.rows()]
        _emit(args, payload)
    else:
        _emit(args, None, [[_fmt(v) for v in r] for r in rep.rows()], ["tau", "allan", "var_of_var", "autocorr"])
        if args.out:
            sys.stdout.write(json.dumps(summary) + "\n")
        else:
            sys.stderr.write(json.dumps(summary) + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ sweep

def cmd_sweep(args):
    from .sim import SweepConfig, parse_db_grid, run_sweep

    sigma = _read_matrix(args.cov_file) if args.cov_file else None
    cfg = SweepConfig(
        family=args.family, M=args.m, nu=args.nu, snr_db_grid=parse_db_grid(args.snr_db),
        trials_per_point=args.trials, seed=args.seed, detector=args.detector.upper(),
        priors=_floats(args.priors) if args.priors else None, correlated_sigma=sigma,
        H=args.h, Theta=args.theta, M_I=args.m_i, M_Q=args.m_q, kappa=args.kappa, L=args.dim,
    )
    res = run_sweep(cfg, jobs=args.jobs)
    text = res.to_json() if args.format == "json" else res.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ----------------------------------------------------------------- verify

def cmd_verify(args):
    from .verify import run_suite

    suites = ["limits", "reductions"] if args.suite == "all" else [args.suite]
    ok = True
    for s in suites:
        for c in run_suite(s):
            sys.stdout.write(c.line() + "\n")
            ok &= c.passed
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- parsing

def build_parser():
    p = _Parser(prog="mcleish", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", help="evaluate or sample a McLeish law")
    d.add_argument("op", choices=["pdf", "cdf", "ccdf", "mgf", "moment", "sample"])
    d.add_argument("--nu", type=_nu, required=True)
    d.add_argument("--mu", type=float, default=0.0)
    d.add_argument("--mu-c", help="complex location, e.g. 1+2j")
    d.add_argument("--sigma2", type=float, default=1.0)
    d.add_argument("--rho", type=float, help="inphase-quadrature correlation (complex law)")
    d.add_argument("--complex", action="store_true", help="complex (circular or elliptical) law")
    d.add_argument("--cov-file", help="CSV covariance matrix for a multivariate law")
    d.add_argument("--mean", help="comma-separated mean vector for a multivariate law")
    d.add_argument("--x", help="evaluation point(s), comma-separated")
    d.add_argument("--s", help="MGF argument(s), comma-separated")
    d.add_argument("--k", type=int, help="moment order")
    d.add_argument("--l", type=int, help="second moment order (complex joint moment)")
    d.add_argument("--central", action="store_true", help="central instead of raw moment")
    d.add_argument("--n", type=int, help="number of samples")
    d.add_argument("--seed", type=int)
    d.add_argument("--header", action="store_true", help="write a CSV header row")
    d.add_argument("--out")
    d.add_argument("--format", choices=["csv", "json"], default="csv")
    d.set_defaults(func=cmd_dist)

    for name, func, helptext in (("fit", cmd_fit, "method-of-moments fit of a sample file"),
                                 ("allan", cmd_allan, "variance stability (Allan) analysis of a trace")):
        a = sub.add_parser(name, help=helptext)
        a.add_argument("--input", required=True)
        a.add_argument("--input-format", choices=["csv", "bin"], default="csv")
        a.add_argument("--complex", action="store_true", help="binary input holds interleaved re,im")
        a.add_argument("--out")
        a.add_argument("--format", choices=["csv", "json"], default="json" if name == "fit" else "csv")
        if name == "allan":
            a.add_argument("--tau0", type=float, default=1.0, help="sample period in seconds")
            a.add_argument("--r-level", type=float, default=0.5)
            a.add_argument("--tc", type=float, help="channel coherence time (default tau0)")
            a.add_argument("--ts", type=float, help="symbol period (default tau0)")
        a.set_defaults(func=func)

    s = sub.add_parser("sweep", help="Monte Carlo error-rate sweep against the closed form")
    s.add_argument("--family", required=True)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--nu", type=_nu, required=True)
    s.add_argument("--snr-db", required=True, help="start:step:stop or comma list, in dB")
    s.add_argument("--trials", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--detector", choices=["ML", "MAP", "ml", "map"], default="ML")
    s.add_argument("--priors")
    s.add_argument("--cov-file")
    s.add_argument("--h", type=float, default=1.0)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--m-i", type=int)
    s.add_argument("--m-q", type=int)
    s.add_argument("--kappa", type=float)
    s.add_argument("--dim", type=int, help="symbol vector dimension")
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.add_argument("--out")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="special-case verification suites")
    v.add_argument("--suite", choices=["limits", "reductions", "all"], default="all")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        _report(exc.code, exc)
        return EXIT_NUMERICAL
    except McLeishError as exc:
        _report(exc.code, exc)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        _report("validation", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
