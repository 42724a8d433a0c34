"""ITISC and Fuzzy-ITISC: update rules, objectives and solvers.

Both variants share one code path. With ``kind=SQUARED`` the per-entry
distortion is ``e_ij = ||x_i - y_j||^2``; with ``kind=LOG`` it is
``e_ij = log max(||x_i - y_j||^2, EPS_D)``. Memberships and weights are
Gibbs distributions over ``e``:

    u_ij = exp(-e_ij / t1) / A_i,           A_i = sum_j exp(-e_ij / t1)
    w_i  = A_i^(-t1/t2) / Z,                Z   = sum_l A_l^(-t1/t2)

and the centers-only objective is ``t2 * log Z``. Everything is evaluated
from ``log A`` and ``log Z`` so small ``t2`` cannot overflow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import xlogy

from . import _kernels
from .core import ClusterState, DistortionKind, Rng, Temperatures, as_points, random_init
from .distortion import EPS_D, distortion_matrix, energy, log_sum_exp
from .optimize import CONVERGED, minimize

logger = logging.getLogger(__name__)

#: Center denominators below this are treated as an empty (degenerate) cluster.
DEGENERATE_DENOM = 1e-300
DIVERGENCE_WINDOW = 20


class DegenerateClusterError(ArithmeticError):
    """A cluster's total membership weight underflowed."""


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """The three estimator terms of the ITISC objective and their total.

    ``conditional_entropy`` is ``-sum_i w_i sum_j u_ij log u_ij`` (non-negative)
    and ``weight_kl`` is ``KL(w || uniform) = sum_i w_i log w_i + log N``. The
    total follows the usual convention of dropping the constant ``t2 log N``::

        total = expected_distortion - t1 * conditional_entropy - t2 * (weight_kl - log N)
    """

    expected_distortion: float
    conditional_entropy: float
    weight_kl: float
    total: float


@dataclass(frozen=True)
class _Gibbs:
    energy: np.ndarray
    log_u: np.ndarray
    log_w: np.ndarray
    log_z: float

    @property
    def u(self):
        return np.exp(self.log_u)

    @property
    def w(self):
        return np.exp(self.log_w)


def _temps(t) -> Temperatures:
    return t if isinstance(t, Temperatures) else Temperatures(*t)


def _gibbs(dm, t: Temperatures, kind) -> _Gibbs:
    e = energy(dm, kind)
    log_a, log_u = _kernels.soft_assign(e, 1.0 / t.t1)
    phi = -(t.t1 / t.t2) * log_a
    log_z = log_sum_exp(phi)
    return _Gibbs(e, log_u, phi - log_z, log_z)


def update_membership(dm, t1: float, kind=DistortionKind.SQUARED) -> np.ndarray:
    """Optimal memberships for fixed centers.

    ``exp(-d/t1)`` normalised per row for the squared kind,
    ``d^(-1/t1)`` normalised per row for the log kind.
    """
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    e = energy(np.asarray(dm, dtype=np.float64), kind)
    _, log_u = _kernels.soft_assign(e, 1.0 / t1)
    return np.exp(log_u)


def update_weights(dm, t, kind=DistortionKind.SQUARED) -> np.ndarray:
    """Optimal (worst-case) importance weights for fixed centers."""
    return _gibbs(np.asarray(dm, dtype=np.float64), _temps(t), kind).w


def _log_center_coef(log_u, log_w, t: Temperatures, kind):
    if DistortionKind.parse(kind) is DistortionKind.LOG:
        coef = (1.0 + t.t1) * log_u
        if t.t2 != 1.0:
            # skipped at t2 == 1 so that 0 * log(0) cannot produce NaN
            coef = coef + (1.0 - t.t2) * log_w[:, None]
        return coef
    return log_u + log_w[:, None]


def _center_step(X, log_u, log_w, t, kind, previous=None):
    """Weighted-mean center update; returns ``(centers, n_degenerate)``."""
    centers, log_denom = _kernels.weighted_means(X, _log_center_coef(log_u, log_w, t, kind))
    bad = ~(log_denom >= np.log(DEGENERATE_DENOM))
    if bad.any():
        if previous is None:
            raise DegenerateClusterError(f"clusters {np.flatnonzero(bad).tolist()} have no weight")
        centers[bad] = previous[bad]
    return centers, int(bad.sum())


def update_centers(data, u, w, t, kind=DistortionKind.SQUARED) -> np.ndarray:
    """Center update for fixed memberships and weights.

    Squared kind: ``y_k = sum_i w_i u_ik x_i / sum_i w_i u_ik``.
    Log kind: the coefficients become ``w_i^(1-t2) u_ik^(1+t1)``.

    Raises
    ------
    DegenerateClusterError
        If a cluster's coefficient sum underflows below 1e-300.
    """
    X = as_points(data)
    with np.errstate(divide="ignore"):
        log_u = np.log(np.asarray(u, dtype=np.float64))
        log_w = np.log(np.asarray(w, dtype=np.float64))
    centers, _ = _center_step(X, log_u, log_w, _temps(t), kind)
    return centers


def full_objective(data, centers, u, w, t, kind=DistortionKind.SQUARED) -> ObjectiveBreakdown:
    """Evaluate the importance-weighted objective at an arbitrary state."""
    X = as_points(data)
    t = _temps(t)
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    e = energy(distortion_matrix(X, centers), kind)
    d_hat = float(w @ (u * e).sum(axis=1))
    h_hat = float(-(w @ xlogy(u, u).sum(axis=1)))
    w_log_w = float(xlogy(w, w).sum())
    kl = w_log_w + np.log(X.shape[0])
    total = d_hat - t.t1 * h_hat - t.t2 * w_log_w
    return ObjectiveBreakdown(d_hat, h_hat, float(kl), float(total))


def reform_objective(data, centers, t, kind=DistortionKind.SQUARED) -> float:
    """Centers-only objective ``t2 * log sum_i A_i^(-t1/t2)``."""
    X = as_points(data)
    t = _temps(t)
    return t.t2 * _gibbs(distortion_matrix(X, centers), t, kind).log_z


def _reform_value_and_grad(X, Y, t, kind):
    dm = distortion_matrix(X, Y)
    gb = _gibbs(dm, t, kind)
    coef = np.exp(gb.log_u + gb.log_w[:, None])
    if DistortionKind.parse(kind) is DistortionKind.LOG:
        # d/dy log(max(d, eps)) = grad(d) / d, and 0 where the clamp is active
        coef = np.where(dm >= EPS_D, coef / np.maximum(dm, EPS_D), 0.0)
    grad = 2.0 * (coef.sum(axis=0)[:, None] * Y - coef.T @ X)
    return t.t2 * gb.log_z, grad


def reform_gradient(data, centers, t, kind=DistortionKind.SQUARED) -> np.ndarray:
    """Analytic gradient of :func:`reform_objective` with respect to the centers.

    Equals ``sum_i w_i u_ik * d e_ik / d y_k`` with ``u``, ``w`` at their
    optimality conditions.
    """
    X = as_points(data)
    Y = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    return _reform_value_and_grad(X, Y, _temps(t), kind)[1]


def _state_from_centers(X, Y, t, kind, **extra) -> ClusterState:
    gb = _gibbs(distortion_matrix(X, Y), t, kind)
    return ClusterState(
        centers=Y,
        membership=gb.u,
        weights=gb.w,
        objective=float(t.t2 * gb.log_z),
        **extra,
    )


def _initial_centers(X, n_clusters, rng, init_centers):
    if init_centers is not None:
        Y = np.array(init_centers, dtype=np.float64)
        if Y.shape != (n_clusters, X.shape[1]):
            raise ValueError(f"init_centers must have shape {(n_clusters, X.shape[1])}")
        return Y, None
    if rng is None:
        raise ValueError("either rng or init_centers is required")
    state = random_init(X, n_clusters, rng)
    return state.centers, state.diagnostics["init_indices"]


def ao_solve(
    data,
    n_clusters: int,
    t,
    kind=DistortionKind.SQUARED,
    rng: Optional[Rng] = None,
    max_iter: int = 300,
    eps: float = 1e-5,
    init_centers=None,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None,
) -> ClusterState:
    """Alternating optimisation: memberships, then weights, then centers.

    Stops when the Frobenius norm of the center change is at most ``eps``.
    Not converging within ``max_iter`` sweeps, or a reformulated objective
    that rises for 20 consecutive sweeps, is reported through
    ``converged=False`` rather than raised; small ``t2`` is known to
    oscillate.

    ``callback(iteration, centers, u, w)`` sees each sweep's memberships and
    weights (computed from the centers entering the sweep) and the updated
    centers.
    """
    X = as_points(data)
    t = _temps(t)
    kind = DistortionKind.parse(kind)
    if not 1 <= n_clusters <= X.shape[0]:
        raise ValueError(f"number of clusters must be in [1, {X.shape[0]}]")
    Y, init_idx = _initial_centers(X, n_clusters, rng, init_centers)

    prev_obj = np.inf
    rising = 0
    n_degenerate = 0
    converged = diverged = False
    it = 0
    trajectory = []
    for it in range(1, max_iter + 1):
        gb = _gibbs(distortion_matrix(X, Y), t, kind)
        Y_new, deg = _center_step(X, gb.log_u, gb.log_w, t, kind, previous=Y)
        n_degenerate += deg
        if callback is not None:
            callback(it, Y_new.copy(), gb.u, gb.w)
        move = float(np.linalg.norm(Y_new - Y))
        Y = Y_new
        obj = reform_objective(X, Y, t, kind)
        trajectory.append(obj)
        rising = rising + 1 if obj > prev_obj else 0
        prev_obj = obj
        if move <= eps:
            converged = True
            break
        if rising >= DIVERGENCE_WINDOW:
            diverged = True
            logger.info("AO objective rose for %d consecutive sweeps; stopping", rising)
            break

    return _state_from_centers(
        X, Y, t, kind,
        iterations=it,
        converged=converged,
        diagnostics={
            "solver": "ao",
            "kind": kind.value,
            "t1": t.t1,
            "t2": t.t2,
            "degenerate_updates": n_degenerate,
            "diverged": diverged,
            "objective_trace": trajectory,
            "init_indices": init_idx,
        },
    )


def reform_solve(
    data,
    n_clusters: int,
    t,
    kind=DistortionKind.SQUARED,
    rng: Optional[Rng] = None,
    tol: float = 1e-6,
    max_iter: int = 500,
    init_centers=None,
) -> ClusterState:
    """Minimise the centers-only objective with L-BFGS, then read off U and W."""
    X = as_points(data)
    t = _temps(t)
    kind = DistortionKind.parse(kind)
    if not 1 <= n_clusters <= X.shape[0]:
        raise ValueError(f"number of clusters must be in [1, {X.shape[0]}]")
    Y0, init_idx = _initial_centers(X, n_clusters, rng, init_centers)
    shape = Y0.shape
    cache = {}

    def fg(y):
        key = y.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = _reform_value_and_grad(X, y.reshape(shape), t, kind)
        return cache[key]

    res = minimize(
        lambda y: fg(y)[0],
        lambda y: fg(y)[1].ravel(),
        Y0.ravel(),
        tol=tol,
        max_iter=max_iter,
    )
    initial = _reform_value_and_grad(X, Y0, t, kind)[0]
    return _state_from_centers(
        X, res.x.reshape(shape), t, kind,
        iterations=res.iterations,
        converged=res.status == CONVERGED,
        diagnostics={
            "solver": "reform",
            "kind": kind.value,
            "t1": t.t1,
            "t2": t.t2,
            "status": res.status,
            "grad_norm": res.grad_norm,
            "initial_objective": float(initial),
            "init_indices": init_idx,
        },
    )
