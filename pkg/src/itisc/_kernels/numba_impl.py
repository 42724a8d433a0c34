"""numba-compiled kernels mirroring ``numpy_impl`` one for one."""

import numpy as np
from numba import njit


@njit(cache=True)
def sq_dist_matrix(X, Y):
    n, s = X.shape
    c = Y.shape[0]
    out = np.empty((n, c))
    for i in range(n):
        for j in range(c):
            acc = 0.0
            for k in range(s):
                t = X[i, k] - Y[j, k]
                acc += t * t
            out[i, j] = acc
    return out


@njit(cache=True)
def soft_assign(E, inv_t1):
    n, c = E.shape
    log_a = np.empty(n)
    log_u = np.empty((n, c))
    for i in range(n):
        m = -np.inf
        for j in range(c):
            z = -E[i, j] * inv_t1
            log_u[i, j] = z
            if z > m:
                m = z
        acc = 0.0
        for j in range(c):
            acc += np.exp(log_u[i, j] - m)
        la = m + np.log(acc)
        log_a[i] = la
        for j in range(c):
            log_u[i, j] -= la
    return log_a, log_u


@njit(cache=True)
def weighted_means(X, log_coef):
    n, s = X.shape
    c = log_coef.shape[1]
    centers = np.zeros((c, s))
    log_denom = np.empty(c)
    for k in range(c):
        m = -np.inf
        for i in range(n):
            if log_coef[i, k] > m:
                m = log_coef[i, k]
        if not np.isfinite(m):
            centers[k, :] = np.nan
            log_denom[k] = -np.inf
            continue
        denom = 0.0
        for i in range(n):
            wgt = np.exp(log_coef[i, k] - m)
            denom += wgt
            for d in range(s):
                centers[k, d] += wgt * X[i, d]
        for d in range(s):
            centers[k, d] /= denom
        log_denom[k] = m + np.log(denom)
    return centers, log_denom


@njit(cache=True)
def nearest(X, Y):
    n, s = X.shape
    c = Y.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dmin = np.empty(n)
    for i in range(n):
        best = np.inf
        arg = 0
        for j in range(c):
            acc = 0.0
            for k in range(s):
                t = X[i, k] - Y[j, k]
                acc += t * t
            if acc < best:
                best = acc
                arg = j
        labels[i] = arg
        dmin[i] = best
    return labels, dmin


@njit(cache=True)
def _lance_williams(code, d_ki, d_kj, d_ij, n_i, n_j, n_k):
    if code == 0:
        return min(d_ki, d_kj)
    if code == 1:
        return max(d_ki, d_kj)
    if code == 2:
        return (n_i * d_ki + n_j * d_kj) / (n_i + n_j)
    return ((n_i + n_k) * d_ki + (n_j + n_k) * d_kj - n_k * d_ij) / (n_i + n_j + n_k)


@njit(cache=True)
def agglomerate(D, n_clusters, code):
    n = D.shape[0]
    W = D.astype(np.float64).copy()
    active = np.ones(n, dtype=np.bool_)
    size = np.ones(n)
    parent = np.arange(n)
    for _ in range(n - n_clusters):
        best = np.inf
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if active[j] and W[i, j] < best:
                    best = W[i, j]
                    bi = i
                    bj = j
        if bi < 0:
            # only infinite dissimilarities left; merge the first active pair
            for i in range(n):
                if active[i]:
                    if bi < 0:
                        bi = i
                    else:
                        bj = i
                        break
            best = W[bi, bj]
        d_ij = best
        for k in range(n):
            if not active[k] or k == bi or k == bj:
                continue
            v = _lance_williams(code, W[bi, k], W[bj, k], d_ij,
                                size[bi], size[bj], size[k])
            W[bi, k] = v
            W[k, bi] = v
        size[bi] += size[bj]
        active[bj] = False
        parent[bj] = bi
    for p in range(n):
        r = p
        while parent[r] != r:
            r = parent[r]
        parent[p] = r
    return parent
