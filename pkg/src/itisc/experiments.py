"""Batch experiments producing long-format reports.

Each function is pure given its seeds, so re-running with the same
arguments reproduces every row exactly.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from .core import DistortionKind, Rng, Temperatures, as_points
from .engine import ao_solve
from .metrics import m_boundary_dist, mixture_kl, within_cluster_dist
from .models import ConfigError, FittedModel, fit_model, model_label, parse_model_spec
from .report import ExperimentReport
from .synth import SCALE_FACTORS, sample_mixture, scaled_cov_specs, shifted_mean_specs, shift_grid_indices

DEFAULT_SEEDS = (0, 1, 2, 3)
T2_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.5, 2.0)
SHIFT_DISTANCES = (1.5, 2.0, 2.5, 3.0)
MAX_GRID_CELLS = 100_000
DEFAULT_SHIFT_MODELS = ("fuzzy-itisc-r:t2=0.1", "kmeans", "fcm", "hc")


def _fmt(x) -> str:
    return f"{x:g}" if isinstance(x, float) else str(x)


def boundary_name(m: int) -> str:
    return "MaxBoundaryDist" if m == 1 else f"{m}-BoundaryDist"


def fit_seeds(data, spec: str, n_clusters: int, seeds: Sequence[int]) -> list[FittedModel]:
    algorithm, params = parse_model_spec(spec)
    if algorithm == "hc":
        # deterministic: one fit serves every seed
        return [fit_model(data, algorithm, n_clusters, None, params)]
    return [fit_model(data, algorithm, n_clusters, s, params) for s in seeds]


def _boundary(X, model: FittedModel, m: int) -> float:
    if model.membership is not None:
        return m_boundary_dist(X, model.centers, m, membership=model.membership).value
    return m_boundary_dist(X, model.centers, m, labels=model.labels).value


def boundary_table(data, model_specs: Iterable[str], n_clusters: int, ms: Sequence[int] = (1,),
                   seeds: Sequence[int] = DEFAULT_SEEDS, experiment: str = "boundary") -> ExperimentReport:
    """M-BoundaryDist per model and M, averaged over seeds.

    A spec ``hc:linkage=all`` averages the four linkages.
    """
    X = as_points(data)
    report = ExperimentReport()
    for spec in model_specs:
        if spec.replace(" ", "") in ("hc:linkage=all", "hc-all"):
            fits = [fit_model(X, "hc", n_clusters, None, {"linkage": lk})
                    for lk in ("ward", "complete", "average", "single")]
            label = "hc(linkage=all)"
        else:
            fits = fit_seeds(X, spec, n_clusters, seeds)
            label = fits[0].label
        for m in ms:
            vals = [_boundary(X, f, m) for f in fits]
            report.add(experiment, label, f"C={n_clusters};M={m}", boundary_name(m), np.mean(vals))
        report.add(experiment, label, f"C={n_clusters}", "converged_fraction",
                   np.mean([f.converged for f in fits]))
    return report


def t2_sweep(data, n_clusters: int, grid: Sequence[float] = T2_GRID, seeds: Sequence[int] = DEFAULT_SEEDS,
             t1: float = 1.0, solver: str = "r", experiment: str = "t2-sweep") -> ExperimentReport:
    """Fuzzy-ITISC per T2: MaxBoundaryDist, 10-BoundaryDist, max weight (seed means)."""
    if any(not t2 > 0 for t2 in grid):
        raise ConfigError("every T2 must be positive")
    if not grid:
        raise ConfigError("T2 grid is empty")
    X = as_points(data)
    algorithm = "fuzzy-itisc-ao" if solver == "ao" else "fuzzy-itisc-r"
    report = ExperimentReport()
    m10 = min(10, X.shape[0])
    for t2 in sorted(grid, reverse=True):
        fits = [fit_model(X, algorithm, n_clusters, s, {"t1": t1, "t2": t2}) for s in seeds]
        param = f"C={n_clusters};T2={_fmt(float(t2))}"
        label = model_label(algorithm, {"t1": float(t1)})
        report.add(experiment, label, param, "MaxBoundaryDist", np.mean([_boundary(X, f, 1) for f in fits]))
        report.add(experiment, label, param, boundary_name(m10), np.mean([_boundary(X, f, m10) for f in fits]))
        report.add(experiment, label, param, "max_weight", np.mean([f.weights.max() for f in fits]))
        report.add(experiment, label, param, "converged_fraction", np.mean([f.converged for f in fits]))
    return report


def weights_trace(data, n_clusters: int, t1: float = 1.0, t2: float = 0.7, seed: int = 0,
                  top_k: int = 10, kind=DistortionKind.LOG, max_iter: int = 300, eps: float = 1e-5,
                  experiment: str = "weights-trace") -> ExperimentReport:
    """Importance weights after every AO sweep, plus the top-k indices."""
    X = as_points(data)
    kind = DistortionKind.parse(kind)
    snapshots = []
    state = ao_solve(X, n_clusters, Temperatures(t1, t2), kind, Rng(seed), max_iter=max_iter, eps=eps,
                     callback=lambda it, y, u, w: snapshots.append((it, w.copy())))
    algorithm = model_label("fuzzy-itisc-ao" if kind is DistortionKind.LOG else "itisc-ao", {"t1": t1, "t2": t2})
    report = ExperimentReport()
    k = min(top_k, X.shape[0])
    for it, w in snapshots:
        report.add(experiment, algorithm, f"iteration={it}", "max_weight", w.max())
        report.add(experiment, algorithm, f"iteration={it}", "weight_sum", w.sum())
        for rank, idx in enumerate(np.argsort(-w, kind="stable")[:k], start=1):
            report.add(experiment, algorithm, f"iteration={it};rank={rank}", "top_index", idx)
        for i, wi in enumerate(w):
            report.add(experiment, algorithm, f"iteration={it};index={i}", "weight", wi)
    report.add(experiment, algorithm, "final", "iterations", state.iterations)
    report.add(experiment, algorithm, "final", "converged", float(state.converged))
    return report


def _evaluate_cell(args):
    cell, eval_seed, centers = args
    Z = sample_mixture(cell, Rng(eval_seed)).points
    return [within_cluster_dist(Z, c) for c in centers]


def shift_experiment(spec, data_seed: int = 0, fit_seed: int = 0, distances: Sequence[float] = SHIFT_DISTANCES,
                     n_angles: int = 5, models: Sequence[str] = DEFAULT_SHIFT_MODELS, eval_seed: int = 12345,
                     mode: str = "mean", factor_set: Sequence[float] = SCALE_FACTORS, parallel: int = 1,
                     force: bool = False, experiment: str = "shift-exp") -> ExperimentReport:
    """Robustness of fitted models to shifted versions of a Gaussian mixture.

    All models are fitted once on a sample of ``spec``. Every shifted cell is
    sampled with the same ``eval_seed`` (common random numbers across cells)
    and the same per-component counts as the base spec. The first model is
    the reference; for each other model ``WCD(other) - WCD(reference)`` is
    reported per cell, and the fraction of positive differences (reference
    wins) is summarised per shift distance.
    """
    spec = list(spec)
    models = list(models)
    if len(models) < 2:
        raise ConfigError("shift experiment needs a reference model and at least one other")
    n_cells = (n_angles if mode == "mean" else len(factor_set)) ** len(spec)
    groups = len(distances) if mode == "mean" else 1
    if n_cells * groups > MAX_GRID_CELLS and not force:
        raise ConfigError(f"{n_cells * groups} grid cells exceeds {MAX_GRID_CELLS}; pass force=True (--force) to run anyway")

    X = sample_mixture(spec, Rng(data_seed)).points
    fitted = [fit_seeds(X, m, len(spec), [fit_seed])[0] for m in models]
    labels = [f.label for f in fitted]
    centers = [f.centers for f in fitted]

    if mode == "mean":
        plan = []
        for S in distances:
            if S < 0:
                raise ConfigError("shift distances must be non-negative")
            cells = shifted_mean_specs(spec, S, n_angles)
            names = ["angles=" + "-".join(map(str, idx)) for idx in shift_grid_indices(len(spec), n_angles)]
            plan.append((f"S={_fmt(float(S))}", cells, names))
    elif mode == "cov":
        combos = itertools.product(factor_set, repeat=len(spec))
        cells, names = [], []
        for f in combos:
            cells.append(scaled_cov_specs(spec, f))
            names.append("SF=" + "-".join(_fmt(float(v)) for v in f))
        plan = [("cov", cells, names)]
    else:
        raise ConfigError(f"unknown shift mode {mode!r}")

    report = ExperimentReport()
    for group, cells, names in plan:
        jobs = [(cell, eval_seed, centers) for cell in cells]
        if parallel > 1:
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                results = list(pool.map(_evaluate_cell, jobs, chunksize=max(1, len(jobs) // (4 * parallel))))
        else:
            results = [_evaluate_cell(j) for j in jobs]
        wins = np.zeros(len(models) - 1)
        for cell, name, wcd in zip(cells, names, results):
            param = f"{group};{name}"
            report.add(experiment, "-", param, "KL", mixture_kl(spec, cell))
            for label, v in zip(labels, wcd):
                report.add(experiment, label, param, "WCD", v)
            for k in range(1, len(models)):
                diff = wcd[k] - wcd[0]
                report.add(experiment, f"{labels[k]} vs {labels[0]}", param, "WCD_diff", diff)
                wins[k - 1] += diff > 0
        for k in range(1, len(models)):
            report.add(experiment, f"{labels[k]} vs {labels[0]}", group, "win_ratio", wins[k - 1] / len(cells))
    return report
