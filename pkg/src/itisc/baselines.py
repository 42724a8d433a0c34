"""Comparison models: k-means (k-means++ seeding), fuzzy c-means, agglomerative."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import _kernels
from .core import ClusterState, Rng, as_points, random_init
from .distortion import EPS_D, distortion_matrix, log_sum_exp

LINKAGES = ("ward", "complete", "average", "single")


@dataclass
class HardClustering:
    labels: np.ndarray
    centers: np.ndarray
    cost: float = float("nan")
    iterations: int = 0
    converged: bool = True
    degenerate: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict)


def _check_clusters(X, n_clusters):
    if not 1 <= n_clusters <= X.shape[0]:
        raise ValueError(f"number of clusters must be in [1, {X.shape[0]}], got {n_clusters}")


def kmeans_pp_init(data, n_clusters: int, rng: Rng) -> np.ndarray:
    """k-means++ seeding: each new center drawn with probability proportional
    to the squared distance to the closest center chosen so far."""
    X = as_points(data)
    n = X.shape[0]
    _check_clusters(X, n_clusters)
    chosen = [rng.integers(n)]
    closest = distortion_matrix(X, X[chosen[0]][None, :])[:, 0]
    for _ in range(1, n_clusters):
        total = closest.sum()
        if total > 0:
            cum = np.cumsum(closest)
            idx = int(np.searchsorted(cum, rng.uniform() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = rng.integers(n)
        chosen.append(idx)
        closest = np.minimum(closest, distortion_matrix(X, X[idx][None, :])[:, 0])
    return X[chosen].copy()


def _group_means(X, labels, n_clusters, fallback):
    counts = np.bincount(labels, minlength=n_clusters).astype(np.float64)
    sums = np.zeros((n_clusters, X.shape[1]))
    np.add.at(sums, labels, X)
    centers = fallback.copy()
    nz = counts > 0
    centers[nz] = sums[nz] / counts[nz, None]
    return centers, counts


def kmeans_solve(
    data,
    n_clusters: int,
    rng: Rng,
    max_iter: int = 300,
    eps: float = 1e-6,
    init_centers=None,
    n_init: int = 10,
) -> HardClustering:
    """Lloyd iterations from k-means++ seeds, best of ``n_init`` starts.

    An empty cluster is re-seeded at the point farthest from its assigned
    center, which is then moved to the empty cluster. The run with the
    lowest within-cluster sum of squares is returned (first run on ties).
    Passing ``init_centers`` performs a single run from those centers.
    """
    X = as_points(data)
    _check_clusters(X, n_clusters)
    if init_centers is not None:
        return _lloyd(X, n_clusters, np.array(init_centers, dtype=np.float64), max_iter, eps)
    if n_init < 1:
        raise ValueError("n_init must be at least 1")
    best = None
    for _ in range(n_init):
        run = _lloyd(X, n_clusters, kmeans_pp_init(X, n_clusters, rng), max_iter, eps)
        if best is None or run.cost < best.cost:
            best = run
    best.diagnostics["n_init"] = n_init
    return best


def _lloyd(X, n_clusters, Y, max_iter, eps):
    converged = False
    cost_trace = []
    reseeds = 0
    it = 0
    for it in range(1, max_iter + 1):
        labels, dmin = _kernels.nearest(X, Y)
        cost_trace.append(float(dmin.sum()))
        counts = np.bincount(labels, minlength=n_clusters)
        for k in np.flatnonzero(counts == 0):
            far = int(np.argmax(dmin))
            labels[far] = k
            dmin[far] = 0.0
            reseeds += 1
        Y_new, _ = _group_means(X, labels, n_clusters, Y)
        move = float(np.linalg.norm(Y_new - Y))
        Y = Y_new
        if move <= eps:
            converged = True
            break
    labels, dmin = _kernels.nearest(X, Y)
    return HardClustering(
        labels=labels,
        centers=Y,
        cost=float(dmin.sum()),
        iterations=it,
        converged=converged,
        degenerate=bool(np.any(np.bincount(labels, minlength=n_clusters) == 0)),
        diagnostics={"cost_trace": cost_trace, "reseeds": reseeds},
    )


def fcm_membership(dm, m: float) -> np.ndarray:
    """``u_ij = d_ij^(1/(1-m)) / sum_k d_ik^(1/(1-m))``.

    A row with zero distances gives crisp membership shared equally by the
    coinciding centers.
    """
    dm = np.asarray(dm, dtype=np.float64)
    zero = dm <= 0.0
    with np.errstate(divide="ignore"):
        logp = np.log(dm) / (1.0 - m)
    lse = log_sum_exp(np.where(zero, -np.inf, logp), axis=1)
    u = np.exp(logp - lse[:, None])
    rows = zero.any(axis=1)
    if rows.any():
        u[rows] = zero[rows] / zero[rows].sum(axis=1, keepdims=True)
    return u


def fcm_objective(dm, u, m: float) -> float:
    return float((np.asarray(u) ** m * dm).sum())


def fcm_solve(
    data,
    n_clusters: int,
    m: float = 2.0,
    rng: Optional[Rng] = None,
    max_iter: int = 300,
    eps: float = 1e-5,
    init_centers=None,
    callback=None,
) -> ClusterState:
    """Fuzzy c-means by alternating membership and center updates.

    Initial centers are drawn exactly like the ITISC solvers (distinct data
    rows via :func:`random_init`), so equal seeds give equal starts.
    """
    if not m > 1:
        raise ValueError("fuzzifier m must be greater than 1")
    X = as_points(data)
    _check_clusters(X, n_clusters)
    if init_centers is not None:
        Y = np.array(init_centers, dtype=np.float64)
    elif rng is not None:
        Y = random_init(X, n_clusters, rng).centers
    else:
        raise ValueError("either rng or init_centers is required")

    converged = False
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        dm = distortion_matrix(X, Y)
        u = fcm_membership(dm, m)
        um = u ** m
        denom = um.sum(axis=0)
        Y_new = Y.copy()
        ok = denom > 0
        Y_new[ok] = (um.T @ X)[ok] / denom[ok, None]
        trace.append(fcm_objective(dm, u, m))
        if callback is not None:
            callback(it, Y_new.copy(), u)
        move = float(np.linalg.norm(Y_new - Y))
        Y = Y_new
        if move <= eps:
            converged = True
            break
    dm = distortion_matrix(X, Y)
    u = fcm_membership(dm, m)
    n = X.shape[0]
    return ClusterState(
        centers=Y,
        membership=u,
        weights=np.full(n, 1.0 / n),
        objective=fcm_objective(dm, u, m),
        iterations=it,
        converged=converged,
        diagnostics={"solver": "fcm", "m": m, "objective_trace": trace},
    )


def fcm_reform_objective(data, centers, m: float = 2.0) -> float:
    """``sum_i (sum_j d_ij^(1/(1-m)))^(1-m)``, with distances clamped at EPS_D."""
    if not m > 1:
        raise ValueError("fuzzifier m must be greater than 1")
    dm = np.maximum(distortion_matrix(data, centers), EPS_D)
    inner = log_sum_exp(np.log(dm) / (1.0 - m), axis=1)
    return float(np.exp((1.0 - m) * inner).sum())


def _relabel(reps):
    """Map representative ids to 0..C-1 in order of first appearance."""
    _, first, inverse = np.unique(reps, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.int64)


def hierarchical_solve(data, n_clusters: int, linkage: str = "ward") -> HardClustering:
    """Agglomerative clustering with Lance-Williams updates.

    Ward works on squared Euclidean distances; single, complete and average
    use plain Euclidean distances. Ties merge the lexicographically smallest
    pair of cluster representatives.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    X = as_points(data)
    _check_clusters(X, n_clusters)
    D = distortion_matrix(X, X)
    if linkage != "ward":
        D = np.sqrt(D)
    labels = _relabel(_kernels.agglomerate(D, n_clusters, linkage))
    centers, _ = _group_means(X, labels, n_clusters, np.zeros((n_clusters, X.shape[1])))
    diff = X - centers[labels]
    return HardClustering(
        labels=labels,
        centers=centers,
        cost=float(np.einsum("ij,ij->", diff, diff)),
        diagnostics={"linkage": linkage},
    )
