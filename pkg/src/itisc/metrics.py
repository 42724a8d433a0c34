"""Evaluation quantities: boundary distances, within-cluster distance, KL."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import xlogy

from . import _kernels
from .core import as_points


@dataclass(frozen=True)
class GaussianSpec:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=np.float64))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean of length {mean.size}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ValueError("covariance is not symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance is not positive definite") from None
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.cov)


@dataclass(frozen=True)
class BoundaryReport:
    m: int
    boundary_indices: np.ndarray
    value: float
    assignment_rule: str


def dataset_centroid(data) -> np.ndarray:
    return as_points(data).mean(axis=0)


def boundary_points(data, m: int) -> np.ndarray:
    """Indices of the ``m`` points farthest from the centroid.

    Ranked by squared distance, descending; ties go to the lower index.
    """
    X = as_points(data)
    n = X.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"M must be in [1, {n}], got {m}")
    diff = X - dataset_centroid(X)
    d2 = np.einsum("ij,ij->i", diff, diff)
    # stable sort on -d2 keeps index order among equal distances
    return np.argsort(-d2, kind="stable")[:m]


def assign(data, centers, labels=None, membership=None):
    """Cluster index per point and the rule that produced it.

    Explicit ``labels`` win, then argmax of ``membership`` (lowest index on
    ties), otherwise the nearest center.
    """
    X = as_points(data)
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (X.shape[0],):
            raise ValueError("labels must have one entry per point")
        return labels, "labels"
    if membership is not None:
        membership = np.asarray(membership)
        if membership.shape[0] != X.shape[0]:
            raise ValueError("membership must have one row per point")
        return np.argmax(membership, axis=1), "argmax-membership"
    return _kernels.nearest(X, np.atleast_2d(centers))[0], "nearest-center"


def _assigned_sq_dist(X, centers, labels):
    diff = X - np.atleast_2d(np.asarray(centers, dtype=np.float64))[labels]
    return np.einsum("ij,ij->i", diff, diff)


def m_boundary_dist(data, centers, m: int, labels=None, membership=None) -> BoundaryReport:
    """Sum of squared distances from the ``m`` boundary points to their assigned centers.

    With ``m=1`` this is the MaxBoundaryDist.
    """
    X = as_points(data)
    idx = boundary_points(X, m)
    lab, rule = assign(X, centers, labels, membership)
    value = float(_assigned_sq_dist(X[idx], centers, lab[idx]).sum())
    return BoundaryReport(m=m, boundary_indices=idx, value=value, assignment_rule=rule)


def within_cluster_dist(data, centers, labels=None, membership=None) -> float:
    """Sum over every point of the squared distance to its assigned center."""
    X = as_points(data)
    lab, _ = assign(X, centers, labels, membership)
    return float(_assigned_sq_dist(X, centers, lab).sum())


def gaussian_kl(g1: GaussianSpec, g2: GaussianSpec) -> float:
    """Closed-form ``KL(N(mu1, S1) || N(mu2, S2))`` via Cholesky factors."""
    if g1.dim != g2.dim:
        raise ValueError("dimension mismatch")
    if np.array_equal(g1.mean, g2.mean) and np.array_equal(g1.cov, g2.cov):
        return 0.0
    n = g1.dim
    c2 = cho_factor(g2.cov, lower=True)
    logdet1 = 2.0 * np.log(np.diag(g1.cholesky)).sum()
    logdet2 = 2.0 * np.log(np.diag(c2[0])).sum()
    trace = np.trace(cho_solve(c2, g1.cov))
    dmu = g2.mean - g1.mean
    maha = float(dmu @ cho_solve(c2, dmu))
    # non-negative in exact arithmetic; clip roundoff
    return max(float(0.5 * (logdet2 - logdet1 - n + trace + maha)), 0.0)


def mixture_kl(specs1, specs2) -> float:
    """Sum of positionally paired Gaussian KL divergences."""
    specs1, specs2 = list(specs1), list(specs2)
    if len(specs1) != len(specs2):
        raise ValueError("component lists differ in length")
    g = lambda s: getattr(s, "gaussian", s)  # noqa: E731 - accept MixtureComponent too
    return float(sum(gaussian_kl(g(a), g(b)) for a, b in zip(specs1, specs2)))


def weight_kl_uniform(w) -> float:
    """``KL(w || uniform) = sum_i w_i log w_i + log N`` with ``0 log 0 = 0``."""
    w = np.asarray(w, dtype=np.float64)
    # non-negative by Gibbs' inequality; clip roundoff
    return max(float(xlogy(w, w).sum() + np.log(w.size)), 0.0)
