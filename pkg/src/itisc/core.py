"""Domain types, constraint validation and reproducible randomness."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

ROW_SUM_TOL = 1e-9


class DistortionKind(str, enum.Enum):
    """Which distortion the solvers minimise.

    ``SQUARED`` uses ``d(x, y) = ||x - y||^2``; ``LOG`` uses ``log d(x, y)``
    (the fuzzy variant, which contains fuzzy c-means as a special case).
    """

    SQUARED = "squared-euclidean"
    LOG = "log-squared-euclidean"

    @classmethod
    def parse(cls, value: "DistortionKind | str") -> "DistortionKind":
        if isinstance(value, cls):
            return value
        aliases = {"squared": cls.SQUARED, "sq": cls.SQUARED, "log": cls.LOG, "fuzzy": cls.LOG}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown distortion kind {value!r}") from None


@dataclass(frozen=True)
class Dataset:
    """An N x S matrix of observations; row order is the point index."""

    points: np.ndarray
    components: np.ndarray | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"dataset must be a non-empty N x S matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains non-finite entries")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.components is not None:
            comp = np.asarray(self.components, dtype=np.int64)
            if comp.shape != (pts.shape[0],):
                raise ValueError("component labels must have one entry per point")
            comp.setflags(write=False)
            object.__setattr__(self, "components", comp)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def as_points(data) -> np.ndarray:
    """Return a float64 N x S view of a Dataset or array-like."""
    if isinstance(data, Dataset):
        return data.points
    return Dataset(data).points


@dataclass(frozen=True)
class Temperatures:
    """Fuzziness temperature ``t1`` and deviation temperature ``t2``."""

    t1: float = 1.0
    t2: float = 1.0

    def __post_init__(self):
        for name in ("t1", "t2"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class Violation:
    index: int
    residual: float
    reason: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_membership(u) -> ValidationReport:
    """Check that ``u`` is row-stochastic with entries in [0, 1]."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.size == 0:
        raise ValueError("membership must be a non-empty N x C matrix")
    found = []
    for i, row in enumerate(u):
        lo, hi = row.min(), row.max()
        if lo < 0.0 or hi > 1.0 or not np.all(np.isfinite(row)):
            found.append(Violation(i, float(max(-lo, hi - 1.0)), "entry outside [0, 1]"))
        resid = float(row.sum() - 1.0)
        if not abs(resid) <= ROW_SUM_TOL:
            found.append(Violation(i, resid, "row does not sum to 1"))
    return ValidationReport(tuple(found))


def validate_weights(w) -> ValidationReport:
    """Check that ``w`` is a probability vector."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty vector")
    found = []
    bad = np.flatnonzero((w < 0.0) | (w > 1.0) | ~np.isfinite(w))
    for i in bad:
        found.append(Violation(int(i), float(max(-w[i], w[i] - 1.0)), "entry outside [0, 1]"))
    resid = float(w.sum() - 1.0)
    if not abs(resid) <= ROW_SUM_TOL:
        found.append(Violation(-1, resid, "weights do not sum to 1"))
    return ValidationReport(tuple(found))


@dataclass
class ClusterState:
    """Centers, soft memberships and importance weights of a fitted model."""

    centers: np.ndarray
    membership: np.ndarray
    weights: np.ndarray
    objective: float = float("nan")
    iterations: int = 0
    converged: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n, c = self.membership.shape
        if self.centers.shape[0] != c or self.weights.shape != (n,):
            raise ValueError(
                f"inconsistent shapes: centers {self.centers.shape}, "
                f"membership {self.membership.shape}, weights {self.weights.shape}"
            )

    @property
    def labels(self) -> np.ndarray:
        # argmax picks the lowest cluster index on ties
        return np.argmax(self.membership, axis=1)


class Rng:
    """Seeded random stream with a pinned algorithm.

    Raw 64-bit words come from PCG64 (numpy's implementation of PCG-XSL-RR
    128/64). Uniform doubles take the top 53 bits, ``(raw >> 11) * 2**-53``.
    Normal deviates use the Box-Muller transform on consecutive uniform
    pairs, with ``1 - u`` as the radial variate so the log argument is in
    ``(0, 1]``; both outputs of each pair are used. Integers in ``[0, n)``
    are ``floor(u * n)``. None of this depends on numpy's own distribution
    code, so streams stay stable across numpy versions.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self._bits = np.random.PCG64(self.seed)

    def spawn(self, key: int) -> "Rng":
        """Independent child stream, fully determined by (seed, key)."""
        child = Rng.__new__(Rng)
        child.seed = self.seed
        child._bits = np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(int(key),)))
        return child

    def uniform(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        raw = self._bits.random_raw(count)
        u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, size):
        count = int(np.prod(size))
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        z = np.column_stack((r * np.cos(theta), r * np.sin(theta))).ravel()
        return z[:count].reshape(size)

    def integers(self, n: int, size=None):
        u = self.uniform(size)
        if size is None:
            return min(int(u * n), n - 1)
        return np.minimum((u * n).astype(np.int64), n - 1)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)`` by partial Fisher-Yates."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct items from {n}")
        idx = np.arange(n)
        for i in range(k):
            j = i + self.integers(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k].copy()


def random_init(data, n_clusters: int, rng: Rng) -> ClusterState:
    """Random feasible starting state.

    Memberships and weights are standard-uniform draws normalised so each
    membership row and the weight vector sum to one. Centers are
    ``n_clusters`` distinct rows of the data chosen uniformly by index.
    """
    X = as_points(data)
    n = X.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValueError(f"number of clusters must be in [1, {n}], got {n_clusters}")
    u = rng.uniform((n, n_clusters))
    u /= u.sum(axis=1, keepdims=True)
    w = rng.uniform(n)
    w /= w.sum()
    idx = rng.sample_without_replacement(n, n_clusters)
    return ClusterState(
        centers=X[idx].copy(),
        membership=u,
        weights=w,
        diagnostics={"init_indices": idx.tolist()},
    )
