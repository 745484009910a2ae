"""Select the kernel implementation at import time.

The compiled extension is used when it imports cleanly. Setting
``MCLEISH_BACKEND=python`` forces the pure-Python kernels.
"""

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("MCLEISH_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels

        kernels = _ckernels
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        pass

log_kv = kernels.log_kv
kv = kernels.kv
log_kv_array = kernels.log_kv_array
kv_array = kernels.kv_array
gamma_exp_mean = kernels.gamma_exp_mean
nearest_index = kernels.nearest_index

__all__ = [
    "BACKEND",
    "kernels",
    "log_kv",
    "kv",
    "log_kv_array",
    "kv_array",
    "gamma_exp_mean",
    "nearest_index",
]
