"""Limited-memory BFGS with a strong-Wolfe line search.

Used to minimise the reformulated ITISC objective over the flattened
center matrix, but written as a general unconstrained smooth minimiser.
"""

from __future__ import annotations

import logging
import os
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max-iter"
LINE_SEARCH_FAILURE = "line-search-failure"


@dataclass
class MinimizeResult:
    x: np.ndarray
    f: float
    grad_norm: float
    iterations: int
    status: str
    n_evals: int = 0

    @property
    def success(self) -> bool:
        return self.status == CONVERGED


class GradientCheckError(RuntimeError):
    pass


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimiser of the cubic interpolating (a, fa, ga), (b, fb, gb), or None."""
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = gb - ga + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (gb + d2 - d1) / denom


def _strong_wolfe(phi, f0, g0, alpha0, c1, c2, max_evals):
    """Bracketing + zoom line search (Nocedal & Wright, Alg. 3.5/3.6).

    ``phi(alpha)`` returns ``(f, directional derivative, payload)``.
    Returns ``(alpha, f, payload, n_evals, step)``. On failure ``alpha`` is
    None and ``f``, ``payload`` and ``step`` describe the best
    sufficient-decrease point seen, or are all None if there was none.
    """
    evals = 0
    best = None  # (f, alpha, payload) satisfying sufficient decrease

    def note(alpha, f, payload):
        nonlocal best
        if f <= f0 + c1 * alpha * g0 and (best is None or f < best[0]):
            best = (f, alpha, payload)

    def zoom(lo, f_lo, g_lo, hi, f_hi, g_hi):
        nonlocal evals
        while evals < max_evals:
            trial = _cubic_min(lo, f_lo, g_lo, hi, f_hi, g_hi)
            left, right = min(lo, hi), max(lo, hi)
            margin = 0.1 * (right - left)
            if trial is None or not (left + margin <= trial <= right - margin):
                trial = 0.5 * (lo + hi)
            f_t, g_t, payload = phi(trial)
            evals += 1
            note(trial, f_t, payload)
            if f_t > f0 + c1 * trial * g0 or f_t >= f_lo:
                hi, f_hi, g_hi = trial, f_t, g_t
            else:
                if abs(g_t) <= -c2 * g0:
                    return trial, f_t, payload
                if g_t * (hi - lo) >= 0:
                    hi, f_hi, g_hi = lo, f_lo, g_lo
                lo, f_lo, g_lo = trial, f_t, g_t
            if abs(hi - lo) <= 1e-16 * max(1.0, abs(lo)):
                break
        return None, None, None

    prev, f_prev, g_prev = 0.0, f0, g0
    alpha = alpha0
    while evals < max_evals:
        f_a, g_a, payload = phi(alpha)
        evals += 1
        note(alpha, f_a, payload)
        if not np.isfinite(f_a):
            alpha = 0.5 * (prev + alpha)
            continue
        if f_a > f0 + c1 * alpha * g0 or (evals > 1 and f_a >= f_prev):
            a, f, p = zoom(prev, f_prev, g_prev, alpha, f_a, g_a)
            break
        if abs(g_a) <= -c2 * g0:
            a, f, p = alpha, f_a, payload
            break
        if g_a >= 0:
            a, f, p = zoom(alpha, f_a, g_a, prev, f_prev, g_prev)
            break
        prev, f_prev, g_prev = alpha, f_a, g_a
        alpha *= 2.0
    else:
        a = None
    if a is None:
        if best is not None:
            return None, best[0], best[2], evals, best[1]
        return None, None, None, evals, None
    return a, f, p, evals, a


def check_gradient(f, g, x, step=1e-6) -> float:
    """Max relative error of ``g(x)`` against central differences of ``f``."""
    x = np.asarray(x, dtype=np.float64)
    analytic = np.asarray(g(x), dtype=np.float64)
    numeric = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        h = step * max(1.0, abs(x[k]))
        e[k] = h
        numeric[k] = (f(x + e) - f(x - e)) / (2 * h)
    scale = max(np.linalg.norm(numeric), np.linalg.norm(analytic), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def minimize(
    f: Callable[[np.ndarray], float],
    g: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-6,
    max_iter: int = 500,
    history: int = 10,
    c1: float = 1e-4,
    c2: float = 0.9,
    max_line_evals: int = 40,
    debug: bool | None = None,
) -> MinimizeResult:
    """Minimise ``f`` from ``x0`` with L-BFGS until ``max|g| <= tol``.

    Parameters
    ----------
    f, g : callable
        Objective and its gradient; both must be pure.
    x0 : array_like
        Starting point.
    tol : float
        Stopping threshold on the infinity norm of the gradient.
    max_iter : int
        Iteration cap; exceeding it returns status ``"max-iter"``.
    history : int
        Number of curvature pairs kept for the inverse-Hessian estimate.
    c1, c2 : float
        Strong Wolfe constants for sufficient decrease and curvature.
    max_line_evals : int
        Function evaluations allowed per line search before giving up with
        status ``"line-search-failure"`` (the best iterate is returned).
    debug : bool, optional
        Check ``g`` against finite differences at ``x0`` first and raise
        :class:`GradientCheckError` if the relative error exceeds 1e-3.
        Defaults to the ``ITISC_DEBUG`` environment variable.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.array(x0, dtype=np.float64).ravel()
    if debug is None:
        debug = os.environ.get("ITISC_DEBUG", "0") not in ("", "0")
    if debug:
        err = check_gradient(f, g, x)
        if err > 1e-3:
            raise GradientCheckError(f"gradient disagrees with finite differences (rel. err {err:.3g})")

    fx = float(f(x))
    gx = np.asarray(g(x), dtype=np.float64).ravel()
    n_evals = 1
    if not (np.isfinite(fx) and np.all(np.isfinite(gx))):
        raise ValueError("objective or gradient is not finite at x0")

    pairs: deque = deque(maxlen=history)
    it = 0
    status = MAX_ITER
    while True:
        gnorm = float(np.max(np.abs(gx))) if gx.size else 0.0
        if gnorm <= tol:
            status = CONVERGED
            break
        if it >= max_iter:
            break

        # two-loop recursion
        q = gx.copy()
        alphas = []
        for s, y, rho in reversed(pairs):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if pairs:
            s, y, _ = pairs[-1]
            q *= (s @ y) / (y @ y)
        for (s, y, rho), a in zip(pairs, reversed(alphas)):
            b = rho * (y @ q)
            q += (a - b) * s
        p = -q
        slope = float(gx @ p)
        if slope >= 0:
            # lost descent; restart from steepest descent
            pairs.clear()
            p = -gx
            slope = float(gx @ p)
        alpha0 = 1.0 if pairs else min(1.0, 1.0 / np.linalg.norm(gx))

        def phi(alpha, x=x, p=p):
            xt = x + alpha * p
            ft = float(f(xt))
            gt = np.asarray(g(xt), dtype=np.float64).ravel()
            return ft, float(gt @ p), (xt, gt)

        alpha, f_new, payload, evals, used = _strong_wolfe(
            phi, fx, slope, alpha0, c1, c2, max_line_evals
        )
        n_evals += evals
        if alpha is None:
            if payload is not None and f_new < fx:
                x, gx = payload
                fx = f_new
                it += 1
            status = LINE_SEARCH_FAILURE
            logger.debug("line search failed at iteration %d", it)
            break
        x_new, g_new = payload
        s = x_new - x
        y = g_new - gx
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
        x, gx, fx = x_new, g_new, f_new
        it += 1

    gnorm = float(np.max(np.abs(gx))) if gx.size else 0.0
    return MinimizeResult(x=x, f=fx, grad_norm=gnorm, iterations=it, status=status, n_evals=n_evals)
