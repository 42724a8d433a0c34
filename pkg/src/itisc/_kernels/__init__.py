"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``ITISC_DISABLE_NUMBA`` is unset (or ``0``). Set it to ``1`` to
force the numpy implementation, e.g. for debugging or benchmarking.
"""

import os

import numpy as np

from . import numpy_impl

_disabled = os.environ.get("ITISC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false")

if _disabled:
    _impl = numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        _impl = numpy_impl
        BACKEND = "numpy"

LINKAGE_CODES = numpy_impl.LINKAGE_CODES


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def sq_dist_matrix(X, Y):
    return _impl.sq_dist_matrix(_f64(X), _f64(Y))


def soft_assign(E, inv_t1):
    return _impl.soft_assign(_f64(E), float(inv_t1))


def weighted_means(X, log_coef):
    return _impl.weighted_means(_f64(X), _f64(log_coef))


def nearest(X, Y):
    labels, dmin = _impl.nearest(_f64(X), _f64(Y))
    return np.asarray(labels, dtype=np.int64), dmin


def agglomerate(D, n_clusters, linkage):
    return np.asarray(
        _impl.agglomerate(_f64(D), int(n_clusters), LINKAGE_CODES[linkage]),
        dtype=np.int64,
    )
