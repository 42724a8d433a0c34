"""Pure-numpy reference kernels.

Every function here has a numba twin in ``numba_impl`` with the same
signature and semantics; results agree to floating-point summation order.
"""

import numpy as np

LINKAGE_CODES = {"single": 0, "complete": 1, "average": 2, "ward": 3}


def sq_dist_matrix(X, Y):
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def soft_assign(E, inv_t1):
    """Row-wise log partition and log responsibilities of ``exp(-E * inv_t1)``.

    Returns ``(log_a, log_u)`` with ``log_a[i] = log sum_j exp(-E[i, j] * inv_t1)``.
    """
    Z = -E * inv_t1
    m = Z.max(axis=1)
    log_a = m + np.log(np.exp(Z - m[:, None]).sum(axis=1))
    log_u = Z - log_a[:, None]
    return log_a, log_u


def weighted_means(X, log_coef):
    """Column-wise weighted means of the rows of ``X``.

    ``log_coef`` is N x C and holds log weights; each column is max-shifted
    before exponentiation. Returns ``(centers, log_denominator)``. A column
    whose weights are all zero yields NaN centers and ``-inf`` denominator.
    """
    m = log_coef.max(axis=0)
    finite = np.isfinite(m)
    shift = np.where(finite, m, 0.0)
    c = np.exp(log_coef - shift[None, :])
    denom = c.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        centers = (c.T @ X) / denom[:, None]
        log_denom = np.where(finite, shift + np.log(denom), -np.inf)
    return centers, log_denom


def nearest(X, Y):
    D = sq_dist_matrix(X, Y)
    labels = D.argmin(axis=1)
    return labels, D[np.arange(X.shape[0]), labels]


def _lance_williams(code, d_ki, d_kj, d_ij, n_i, n_j, n_k):
    if code == 0:
        return np.minimum(d_ki, d_kj)
    if code == 1:
        return np.maximum(d_ki, d_kj)
    if code == 2:
        return (n_i * d_ki + n_j * d_kj) / (n_i + n_j)
    tot = n_i + n_j + n_k
    return ((n_i + n_k) * d_ki + (n_j + n_k) * d_kj - n_k * d_ij) / tot


def agglomerate(D, n_clusters, code):
    """Naive agglomeration over a dense dissimilarity matrix.

    Only the strict upper triangle of the working copy is kept finite, so a
    row-major ``argmin`` returns the lexicographically smallest minimal pair.
    Returns the surviving representative index for every point.
    """
    n = D.shape[0]
    W = np.triu(D.astype(np.float64), 1)
    W[np.tril_indices(n)] = np.inf
    size = np.ones(n)
    parent = np.arange(n)
    for _ in range(n - n_clusters):
        flat = int(np.argmin(W))
        i, j = divmod(flat, n)
        d_ij = W[i, j]
        row_i = np.minimum(W[i, :], W[:, i])
        row_j = np.minimum(W[j, :], W[:, j])
        alive = np.isfinite(row_i) & np.isfinite(row_j)
        alive[i] = alive[j] = False
        new = np.full(n, np.inf)
        new[alive] = _lance_williams(
            code, row_i[alive], row_j[alive], d_ij, size[i], size[j], size[alive]
        )
        W[i, i + 1:] = new[i + 1:]
        W[:i, i] = new[:i]
        W[j, :] = np.inf
        W[:, j] = np.inf
        size[i] += size[j]
        parent[j] = i
    # path compression: representatives always have a smaller index
    for p in range(n):
        r = p
        while parent[r] != r:
            r = parent[r]
        parent[p] = r
    return parent
