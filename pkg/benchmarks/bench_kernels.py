"""Compare the compiled and pure-Python kernels on representative workloads.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is timed with
timeit (best of several repeats) and the two backends are checked for
agreement on the same inputs.
"""

import argparse
import timeit

import numpy as np

from mcleish import _kernels_py

try:
    from mcleish import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def workloads(rng):
    x = rng.uniform(1e-3, 40.0, 20000)
    a = rng.uniform(0.0, 50.0, 20000)
    r = rng.standard_normal((100000, 1)) + 1j * rng.standard_normal((100000, 1))
    sym = np.exp(2j * np.pi * np.arange(16) / 16)[:, None]
    return [
        ("log_kv_array(nu=1.3, 2e4 pts)", lambda k: k.log_kv_array(1.3, x)),
        ("gamma_exp_mean(nu=0.7, 2e4 pts)", lambda k: k.gamma_exp_mean(0.7, a)),
        ("nearest_index(1e5 x 16-PSK)", lambda k: k.nearest_index(r, sym, 1.0)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(2024)
    print("%-34s %12s %12s %9s %10s" % ("kernel", "python [ms]", "cython [ms]", "speedup", "max |diff|"))
    for name, fn in workloads(rng):
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print("%-34s %12.2f %12s %9s %10s" % (name, tp, "-", "-", "-"))
            continue
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        diff = np.max(np.abs(np.asarray(fn(_kernels_py), dtype=float) - np.asarray(fn(_ckernels), dtype=float)))
        print("%-34s %12.2f %12.2f %8.1fx %10.2e" % (name, tp, tc, tp / tc, diff))


if __name__ == "__main__":
    main()
