"""Uniform fit/predict/serialise wrapper over every clustering algorithm."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _kernels
from .baselines import LINKAGES, fcm_solve, hierarchical_solve, kmeans_solve
from .core import DistortionKind, Rng, Temperatures, as_points
from .engine import ao_solve, reform_solve

ALGORITHMS = (
    "kmeans",
    "fcm",
    "hc",
    "itisc-ao",
    "itisc-r",
    "fuzzy-itisc-ao",
    "fuzzy-itisc-r",
)
ALIASES = {"km": "kmeans", "k-means": "kmeans", "fi": "fuzzy-itisc-r", "hierarchical": "hc"}

# Parameters each algorithm accepts, with defaults.
DEFAULTS = {
    "kmeans": {"n_init": 10},
    "fcm": {"m": 2.0},
    "hc": {"linkage": "ward"},
    "itisc-ao": {"t1": 1.0, "t2": 1.0},
    "itisc-r": {"t1": 1.0, "t2": 1.0},
    "fuzzy-itisc-ao": {"t1": 1.0, "t2": 1.0},
    "fuzzy-itisc-r": {"t1": 1.0, "t2": 1.0},
}


class ConfigError(ValueError):
    """Invalid algorithm name or parameters."""


def canonical(algorithm: str) -> str:
    name = ALIASES.get(algorithm, algorithm)
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    return name


def resolve_params(algorithm: str, params: dict | None = None) -> dict:
    algorithm = canonical(algorithm)
    out = dict(DEFAULTS[algorithm])
    for key, value in (params or {}).items():
        if value is None:
            continue
        if key not in out:
            raise ConfigError(f"{algorithm} does not take parameter {key!r}")
        out[key] = value
    if algorithm == "hc":
        if out["linkage"] not in LINKAGES:
            raise ConfigError(f"unknown linkage {out['linkage']!r}")
    elif algorithm == "fcm":
        out["m"] = float(out["m"])
        if not out["m"] > 1:
            raise ConfigError("fcm needs m > 1")
    elif algorithm == "kmeans":
        out["n_init"] = int(out["n_init"])
        if out["n_init"] < 1:
            raise ConfigError("kmeans needs n_init >= 1")
    else:
        try:
            t = Temperatures(out["t1"], out["t2"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        out["t1"], out["t2"] = t.t1, t.t2
    return out


def parse_model_spec(text: str) -> tuple[str, dict]:
    """Parse ``name[:key=value,...]``, e.g. ``fuzzy-itisc-r:t2=0.1``."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"bad parameter {item!r} in model spec {text!r}")
        key = key.strip()
        value = value.strip()
        if key == "linkage":
            params[key] = value
        elif key == "n_init":
            params[key] = int(value)
        else:
            try:
                params[key] = float(value)
            except ValueError:
                raise ConfigError(f"parameter {key} must be numeric in {text!r}") from None
    algorithm = canonical(name.strip())
    return algorithm, resolve_params(algorithm, params)


def model_label(algorithm: str, params: dict) -> str:
    keys = sorted(k for k in params if k != "n_init")
    if not keys:
        return algorithm
    return algorithm + "(" + ",".join(f"{k}={params[k]:g}" if isinstance(params[k], float) else f"{k}={params[k]}" for k in keys) + ")"


@dataclass
class FittedModel:
    algorithm: str
    params: dict
    seed: int | None
    centers: np.ndarray
    labels: np.ndarray
    membership: np.ndarray | None = None
    weights: np.ndarray | None = None
    objective: float = float("nan")
    iterations: int = 0
    converged: bool = True
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return model_label(self.algorithm, self.params)

    @property
    def assignment_rule(self) -> str:
        return "argmax-membership" if self.membership is not None else "labels"

    def predict(self, data) -> np.ndarray:
        """Nearest center, lowest index on ties.

        For the soft models this is also the argmax of the optimal membership,
        which decreases monotonically in distance.
        """
        return _kernels.nearest(as_points(data), self.centers)[0]

    def to_dict(self, include_membership: bool = False) -> dict:
        out = {
            "algorithm": self.algorithm,
            "params": self.params,
            "seed": self.seed,
            "centers": self.centers.tolist(),
            "objective": float(self.objective),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "diagnostics": _jsonable(self.diagnostics),
        }
        if include_membership:
            out["labels"] = self.labels.tolist()
            if self.membership is not None:
                out["membership"] = self.membership.tolist()
            if self.weights is not None:
                out["weights"] = self.weights.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        centers = np.asarray(d["centers"], dtype=np.float64)
        return cls(
            algorithm=canonical(d["algorithm"]),
            params=dict(d.get("params", {})),
            seed=d.get("seed"),
            centers=centers,
            labels=np.asarray(d.get("labels", []), dtype=np.int64),
            membership=None if d.get("membership") is None else np.asarray(d["membership"]),
            weights=None if d.get("weights") is None else np.asarray(d["weights"]),
            objective=float(d.get("objective", float("nan"))),
            iterations=int(d.get("iterations", 0)),
            converged=bool(d.get("converged", True)),
            diagnostics=dict(d.get("diagnostics", {})),
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def fit_model(data, algorithm: str, n_clusters: int, seed: int | None = 0, params: dict | None = None) -> FittedModel:
    """Fit one model; ``seed`` drives every random choice of the run."""
    X = as_points(data)
    algorithm = canonical(algorithm)
    p = resolve_params(algorithm, params)
    rng = Rng(seed if seed is not None else 0)
    if algorithm == "kmeans":
        res = kmeans_solve(X, n_clusters, rng, n_init=p["n_init"])
        return FittedModel(algorithm, p, seed, res.centers, res.labels, objective=res.cost,
                           iterations=res.iterations, converged=res.converged,
                           diagnostics={"reseeds": res.diagnostics["reseeds"]})
    if algorithm == "hc":
        res = hierarchical_solve(X, n_clusters, p["linkage"])
        return FittedModel(algorithm, p, None, res.centers, res.labels, objective=res.cost)
    if algorithm == "fcm":
        st = fcm_solve(X, n_clusters, p["m"], rng)
    else:
        kind = DistortionKind.LOG if algorithm.startswith("fuzzy") else DistortionKind.SQUARED
        solve = ao_solve if algorithm.endswith("-ao") else reform_solve
        st = solve(X, n_clusters, Temperatures(p["t1"], p["t2"]), kind, rng)
    diag = {k: v for k, v in st.diagnostics.items() if k != "objective_trace"}
    return FittedModel(algorithm, p, seed, st.centers, st.labels, st.membership, st.weights,
                       st.objective, st.iterations, st.converged, diag)
