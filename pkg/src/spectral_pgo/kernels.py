"""Hot assembly kernels, compiled when available.

The Cython module ``_kernels`` is used if it was built; otherwise the numpy
implementations in ``_kernels_py`` are used. Setting ``SPECTRAL_PGO_PURE_PYTHON=1``
forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("SPECTRAL_PGO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"


def _index(a):
    return np.ascontiguousarray(a, dtype=np.intp)


def scatter_laplacian(out, i_idx, k_idx, weights, impl=None):
    (impl or _impl).scatter_laplacian(
        out, _index(i_idx), _index(k_idx), np.ascontiguousarray(weights, dtype=np.float64)
    )
    return out


def scatter_blocks(out, i_idx, k_idx, blocks, impl=None):
    (impl or _impl).scatter_blocks(
        out, _index(i_idx), _index(k_idx), np.ascontiguousarray(blocks, dtype=np.float64)
    )
    return out


def congruence(transforms, infos, impl=None):
    return (impl or _impl).congruence(
        np.ascontiguousarray(transforms, dtype=np.float64),
        np.ascontiguousarray(infos, dtype=np.float64),
    )


def available_backends():
    """Map backend name to implementation module, for benchmarks and tests."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
