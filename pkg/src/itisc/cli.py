"""Command line front-end: ``itisc <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .core import Dataset, Rng, as_points
from .experiments import (
    DEFAULT_SEEDS,
    DEFAULT_SHIFT_MODELS,
    SHIFT_DISTANCES,
    T2_GRID,
    boundary_table,
    shift_experiment,
    t2_sweep,
    weights_trace,
)
from .metrics import m_boundary_dist, within_cluster_dist
from .models import ConfigError, FittedModel, fit_model, parse_model_spec, resolve_params
from .report import ExperimentReport, build_metadata
from .synth import SCALE_FACTORS, dataset_csv, read_dataset_csv, resolve_spec, sample_mixture

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
FIT_METRICS = ("objective", "MaxBoundaryDist", "10-BoundaryDist", "WithinClusterDist", "max_weight")


def load_dataset(source: str, data_seed: int = 0) -> Dataset:
    """A dataset CSV path, or a built-in name / JSON spec sampled with ``data_seed``."""
    path = Path(source)
    if path.suffix == ".csv" or (path.is_file() and path.suffix != ".json"):
        if not path.is_file():
            raise ConfigError(f"dataset file {source!r} does not exist")
        return read_dataset_csv(path)
    try:
        spec = resolve_spec(source)
    except KeyError:
        raise ConfigError(f"unknown dataset {source!r}") from None
    return sample_mixture(spec, Rng(data_seed))


def _seeds(args) -> list[int]:
    seeds = [args.seed] if args.seed is not None else list(args.seeds)
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    if not seeds:
        raise ConfigError("at least one seed is required")
    return seeds


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit_report(report: ExperimentReport, args, seeds) -> None:
    report.metadata = build_metadata(seeds)
    _emit(report.dumps(args.format), args.out)


def _model_spec(args) -> tuple[str, dict]:
    algorithm, params = parse_model_spec(args.algorithm)
    explicit = {"t1": args.t1, "t2": args.t2, "m": args.m, "linkage": args.linkage, "n_init": args.n_init}
    explicit = {k: v for k, v in explicit.items() if v is not None}
    unknown = set(explicit) - set(params)
    if unknown:
        raise ConfigError(f"{algorithm} does not take {', '.join(sorted(unknown))}")
    params.update(explicit)
    return algorithm, resolve_params(algorithm, params)


def _fit_metric(X, model: FittedModel, name: str) -> float:
    kw = {"membership": model.membership} if model.membership is not None else {"labels": model.labels}
    if name == "objective":
        return float(model.objective)
    if name == "MaxBoundaryDist":
        return m_boundary_dist(X, model.centers, 1, **kw).value
    if name == "10-BoundaryDist":
        return m_boundary_dist(X, model.centers, min(10, X.shape[0]), **kw).value
    if name == "WithinClusterDist":
        return within_cluster_dist(X, model.centers, **kw)
    if name == "max_weight":
        return float(model.weights.max()) if model.weights is not None else 1.0 / X.shape[0]
    raise ConfigError(f"unknown metric {name!r}")


# commands


def cmd_gen(args) -> int:
    spec_seed = args.seed if args.seed is not None else args.data_seed
    try:
        spec = resolve_spec(args.dataset)
    except KeyError:
        raise ConfigError(f"unknown dataset {args.dataset!r}") from None
    data = sample_mixture(spec, Rng(spec_seed))
    counts = ",".join(str(c.count) for c in spec)
    print(f"N={data.n} S={data.dim} components={counts}", file=sys.stderr)
    _emit(dataset_csv(data), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    seeds = _seeds(args)
    X = as_points(load_dataset(args.dataset, args.data_seed))
    algorithm, params = _model_spec(args)
    metrics = list(dict.fromkeys(args.metrics))
    for name in metrics:
        if name not in FIT_METRICS:
            raise ConfigError(f"unknown metric {name!r}; choose from {', '.join(FIT_METRICS)}")
    fits = [fit_model(X, algorithm, args.clusters, s, params) for s in seeds]
    values = {name: [_fit_metric(X, f, name) for f in fits] for name in metrics}
    doc = {
        "config": {
            "dataset": args.dataset,
            "data_seed": args.data_seed,
            "algorithm": algorithm,
            "params": params,
            "clusters": args.clusters,
            "seeds": seeds,
        },
        "fits": [f.to_dict(include_membership=args.membership) for f in fits],
        "metrics": {name: float(np.mean(v)) for name, v in values.items()},
        "converged": [bool(f.converged) for f in fits],
        "metadata": build_metadata(seeds),
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    if args.report:
        report = ExperimentReport(metadata=build_metadata(seeds))
        label = fits[0].label
        for name, vals in values.items():
            for s, v in zip(seeds, vals):
                report.add("fit", label, f"C={args.clusters};seed={s}", name, v)
            report.add("fit", label, f"C={args.clusters};mean", name, np.mean(vals))
        Path(args.report).write_text(report.dumps(args.format))
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        doc = json.loads(Path(args.model).read_text())
    except FileNotFoundError:
        raise ConfigError(f"model file {args.model!r} does not exist") from None
    fits = doc["fits"] if "fits" in doc else [doc]
    if not 0 <= args.fit_index < len(fits):
        raise ConfigError(f"fit index {args.fit_index} out of range (model has {len(fits)} fits)")
    model = FittedModel.from_dict(fits[args.fit_index])
    X = as_points(load_dataset(args.dataset, args.data_seed))
    if X.shape[1] != model.centers.shape[1]:
        raise ConfigError(f"dataset has {X.shape[1]} columns but the model expects {model.centers.shape[1]}")
    labels = model.predict(X)
    lines = ["index,label"] + [f"{i},{int(k)}" for i, k in enumerate(labels)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_boundary(args) -> int:
    seeds = _seeds(args)
    X = load_dataset(args.dataset, args.data_seed)
    if any(m < 1 for m in args.M):
        raise ConfigError("every M must be at least 1")
    report = ExperimentReport()
    for c in args.clusters:
        report.extend(boundary_table(X, args.models, c, args.M, seeds))
    _emit_report(report, args, seeds)
    return EXIT_OK


def cmd_t2_sweep(args) -> int:
    seeds = _seeds(args)
    X = load_dataset(args.dataset, args.data_seed)
    report = ExperimentReport()
    for c in args.clusters:
        report.extend(t2_sweep(X, c, args.grid, seeds, t1=args.t1, solver=args.solver))
    _emit_report(report, args, seeds)
    return EXIT_OK


def cmd_weights_trace(args) -> int:
    seed = args.seed if args.seed is not None else args.seeds[0]
    X = load_dataset(args.dataset, args.data_seed)
    resolve_params("fuzzy-itisc-ao", {"t1": args.t1, "t2": args.t2})
    report = weights_trace(X, args.clusters, args.t1, args.t2, seed, args.top_k, args.kind,
                           max_iter=args.max_iter)
    _emit_report(report, args, [seed])
    return EXIT_OK


def cmd_shift_exp(args) -> int:
    seed = args.seed if args.seed is not None else args.seeds[0]
    try:
        spec = resolve_spec(args.dataset)
    except KeyError:
        raise ConfigError(f"unknown dataset spec {args.dataset!r}") from None
    for m in args.models:
        if m.replace(" ", "") != "hc:linkage=all":
            parse_model_spec(m)
    if args.n_angles < 1:
        raise ConfigError("n-angles must be at least 1")
    report = shift_experiment(spec, data_seed=args.data_seed, fit_seed=seed, distances=args.S,
                              n_angles=args.n_angles, models=args.models, eval_seed=args.eval_seed,
                              mode=args.mode, factor_set=args.factors, parallel=args.parallel,
                              force=args.force)
    _emit_report(report, args, [seed])
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="single seed (overrides --seeds)")
    common.add_argument("--seeds", type=int, nargs="+", default=list(DEFAULT_SEEDS), help="fit seeds")
    common.add_argument("--data-seed", type=int, default=0, help="seed for sampling a built-in dataset")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="report format")
    common.add_argument("--parallel", type=int, default=1, help="worker processes")

    parser = argparse.ArgumentParser(prog="itisc", description="ITISC clustering experiments.")
    parser.add_argument("--version", action="version", version=f"itisc {__version__} ({_kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="sample a built-in or JSON-spec dataset to CSV")
    p.add_argument("dataset", help="built-in name (c2, c3-default, c4, c6, extreme) or JSON spec file")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", parents=[common], help="fit one algorithm over several seeds")
    p.add_argument("dataset", help="dataset CSV, built-in name or JSON spec")
    p.add_argument("algorithm", help="algorithm name, optionally with params, e.g. fuzzy-itisc-r:t2=0.1")
    p.add_argument("-C", "--clusters", type=int, required=True)
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--linkage")
    p.add_argument("--n-init", type=int)
    p.add_argument("--metrics", nargs="+", default=["objective", "MaxBoundaryDist", "WithinClusterDist"])
    p.add_argument("--membership", action="store_true", help="store labels, membership and weights")
    p.add_argument("--report", help="also write a per-seed metric report here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="assign rows to the nearest fitted center")
    p.add_argument("model", help="model JSON written by fit")
    p.add_argument("dataset")
    p.add_argument("--fit-index", type=int, default=0, help="which seed's fit to use")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("boundary", parents=[common], help="M-BoundaryDist table")
    p.add_argument("dataset")
    p.add_argument("--models", nargs="+", required=True, help="model specs; hc:linkage=all averages linkages")
    p.add_argument("-C", "--clusters", type=int, nargs="+", required=True)
    p.add_argument("--M", type=int, nargs="+", default=[1])
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("t2-sweep", parents=[common], help="Fuzzy-ITISC across a T2 grid")
    p.add_argument("dataset")
    p.add_argument("-C", "--clusters", type=int, nargs="+", required=True)
    p.add_argument("--grid", type=float, nargs="+", default=list(T2_GRID))
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--solver", choices=("r", "ao"), default="r")
    p.set_defaults(func=cmd_t2_sweep)

    p = sub.add_parser("weights-trace", parents=[common], help="importance weights after every AO sweep")
    p.add_argument("dataset")
    p.add_argument("-C", "--clusters", type=int, required=True)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--t2", type=float, default=0.7)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--kind", choices=("log", "squared"), default="log")
    p.add_argument("--max-iter", type=int, default=300)
    p.set_defaults(func=cmd_weights_trace)

    p = sub.add_parser("shift-exp", parents=[common], help="robustness to shifted mixtures")
    p.add_argument("dataset", help="built-in name or JSON mixture spec")
    p.add_argument("--mode", choices=("mean", "cov"), default="mean")
    p.add_argument("--S", type=float, nargs="+", default=list(SHIFT_DISTANCES), help="mean shift distances")
    p.add_argument("--n-angles", type=int, default=5)
    p.add_argument("--factors", type=float, nargs="+", default=list(SCALE_FACTORS))
    p.add_argument("--models", nargs="+", default=list(DEFAULT_SHIFT_MODELS), help="first one is the reference")
    p.add_argument("--eval-seed", type=int, default=12345)
    p.add_argument("--force", action="store_true", help="allow more than 1e5 grid cells")
    p.set_defaults(func=cmd_shift_exp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, KeyError, FileNotFoundError) as exc:
        print(f"itisc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"itisc: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"itisc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
