"""Distortion measures and stable log-domain reductions."""

import numpy as np

from . import _kernels
from .core import DistortionKind, as_points

#: Lower clamp applied to squared distances before logs or negative powers.
EPS_D = 1e-12


def squared_distance(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return float(diff @ diff)


def distortion_matrix(data, centers) -> np.ndarray:
    """N x C matrix of squared Euclidean distances from points to centers."""
    X = as_points(data)
    Y = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if Y.shape[1] != X.shape[1]:
        raise ValueError(f"dimension mismatch: points have {X.shape[1]} columns, centers {Y.shape[1]}")
    return _kernels.sq_dist_matrix(X, Y)


def log_sum_exp(values, axis=None):
    """``log(sum(exp(values)))`` by max-shift; ``-inf`` entries act as zeros."""
    v = np.asarray(values, dtype=np.float64)
    m = np.max(v, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(v - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def energy(dm, kind) -> np.ndarray:
    """Per-entry distortion used by the solvers: ``d`` or ``log max(d, EPS_D)``."""
    if DistortionKind.parse(kind) is DistortionKind.LOG:
        return np.log(np.maximum(dm, EPS_D))
    return np.asarray(dm, dtype=np.float64)


def certainty_equivalence(distortion_row, t1: float) -> float:
    """Soft minimum ``-t1 * log(sum_j exp(-d_j / t1))`` of one point's distortions."""
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    d = np.asarray(distortion_row, dtype=np.float64)
    return -t1 * log_sum_exp(-d / t1)
