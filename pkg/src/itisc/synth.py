"""Gaussian mixture datasets and distribution-shift grids."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import Dataset, Rng
from .metrics import GaussianSpec

DEFAULT_COUNT = 200

# Factor set for covariance-scaling shifts.
SCALE_FACTORS = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5)


@dataclass(frozen=True)
class MixtureComponent:
    gaussian: GaussianSpec
    count: int = DEFAULT_COUNT

    def __post_init__(self):
        if int(self.count) < 1:
            raise ValueError("component count must be at least 1")
        object.__setattr__(self, "count", int(self.count))


def _component(mean, cov, count=DEFAULT_COUNT):
    return MixtureComponent(GaussianSpec(np.array(mean, float), np.array(cov, float)), count)


_C3A = [[1.0, 0.0], [0.0, 0.3]]
_C3B = [[0.475, 0.303], [0.303, 0.825]]
_C3C = [[0.475, -0.303], [-0.303, 0.825]]
_C4A = [[0.55, 0.45], [0.45, 0.55]]
_C4B = [[0.55, -0.45], [-0.45, 0.55]]

_BUILTINS = {
    "c2": [
        ([1.0, 0.0], [[0.65, 0.35], [0.35, 0.65]], DEFAULT_COUNT),
        ([-1.0, 0.0], [[0.65, -0.35], [-0.35, 0.65]], DEFAULT_COUNT),
    ],
    "c3-default": [
        ([1.0, 0.0], _C3A, DEFAULT_COUNT),
        ([-0.578, -1.0], _C3B, DEFAULT_COUNT),
        ([-0.578, 1.0], _C3C, DEFAULT_COUNT),
    ],
    "c4": [
        ([1.0, 1.0], _C4A, DEFAULT_COUNT),
        ([1.0, -1.0], _C4B, DEFAULT_COUNT),
        ([-1.0, -1.0], _C4A, DEFAULT_COUNT),
        ([-1.0, 1.0], _C4B, DEFAULT_COUNT),
    ],
    "c6": [
        ([0.5, 0.867], _C3B, DEFAULT_COUNT),
        ([-0.5, 0.867], _C3C, DEFAULT_COUNT),
        ([-1.0, 0.0], _C3A, DEFAULT_COUNT),
        ([-0.5, -0.867], _C3B, DEFAULT_COUNT),
        ([0.5, -0.867], _C3C, DEFAULT_COUNT),
        ([1.0, 0.0], _C3A, DEFAULT_COUNT),
    ],
    "extreme": [
        ([1.0, 0.0], [[0.8, 0.4], [0.4, 0.8]], 2),
        ([8.0, 0.0], [[0.8, 0.4], [0.4, 0.8]], 100),
        ([4.0, 8.0], [[0.8, -0.4], [-0.4, 0.8]], 2),
    ],
}
_ALIASES = {"c3": "c3-default", "default": "c3-default"}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_spec(name: str) -> list[MixtureComponent]:
    """Component list of a named dataset (``c2``, ``c3-default``, ``c4``, ``c6``, ``extreme``)."""
    key = _ALIASES.get(name, name)
    if key not in _BUILTINS:
        raise KeyError(f"unknown dataset {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return [_component(*entry) for entry in _BUILTINS[key]]


def sample_mixture(spec, rng: Rng) -> Dataset:
    """Draw ``mean + L z`` per component, rows ordered by component then draw."""
    blocks, comps = [], []
    for k, comp in enumerate(spec):
        g = comp.gaussian
        z = rng.normal((comp.count, g.dim))
        blocks.append(g.mean + z @ g.cholesky.T)
        comps.append(np.full(comp.count, k))
    return Dataset(np.vstack(blocks), np.concatenate(comps))


def _with_gaussian(comp: MixtureComponent, mean=None, cov=None) -> MixtureComponent:
    g = comp.gaussian
    return replace(comp, gaussian=GaussianSpec(
        g.mean if mean is None else mean,
        g.cov if cov is None else cov,
    ))


def circle_offsets(radius: float, n_angles: int) -> np.ndarray:
    """``n_angles`` equiangular points on a circle, starting at angle 0."""
    if n_angles < 1:
        raise ValueError("n_angles must be at least 1")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    phi = 2.0 * np.pi * np.arange(n_angles) / n_angles
    return radius * np.column_stack((np.cos(phi), np.sin(phi)))


def shift_grid_indices(n_components: int, n_angles: int):
    """Angle-index tuples in grid order (first component varies slowest)."""
    return list(itertools.product(range(n_angles), repeat=n_components))


def shifted_mean_specs(spec, radius: float, n_angles: int) -> list[list[MixtureComponent]]:
    """Every combination of per-component means moved onto a circle of ``radius``.

    Covariances are unchanged. Cells follow :func:`shift_grid_indices` order,
    so three components with 13 angles give 2197 cells.
    """
    spec = list(spec)
    offsets = circle_offsets(radius, n_angles)
    for comp in spec:
        if comp.gaussian.dim != 2:
            raise ValueError("mean-translation shifts are defined for 2-D components")
    moved = [[_with_gaussian(c, mean=c.gaussian.mean + off) for off in offsets] for c in spec]
    return [
        [moved[k][a] for k, a in enumerate(cell)]
        for cell in shift_grid_indices(len(spec), n_angles)
    ]


def scaled_cov_specs(spec, factors) -> list[MixtureComponent]:
    """Multiply each component's covariance by its factor; means unchanged."""
    spec = list(spec)
    factors = [float(f) for f in factors]
    if len(factors) != len(spec):
        raise ValueError(f"need {len(spec)} factors, got {len(factors)}")
    if any(not f > 0 for f in factors):
        raise ValueError("scale factors must be positive")
    return [_with_gaussian(c, cov=c.gaussian.cov * f) for c, f in zip(spec, factors)]


def scaled_cov_grid(spec, factor_set=SCALE_FACTORS):
    """All ``len(factor_set) ** K`` factor combinations and their specs."""
    spec = list(spec)
    combos = list(itertools.product(factor_set, repeat=len(spec)))
    return combos, [scaled_cov_specs(spec, f) for f in combos]


def dataset_csv(dataset: Dataset, include_components: bool = True) -> str:
    """Dataset as CSV text with header ``x1..xS`` and an optional ``component`` column."""
    header = [f"x{k + 1}" for k in range(dataset.dim)]
    with_comp = include_components and dataset.components is not None
    if with_comp:
        header.append("component")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, row in enumerate(dataset.points):
        out = [repr(float(v)) for v in row]
        if with_comp:
            out.append(int(dataset.components[i]))
        writer.writerow(out)
    return buf.getvalue()


def write_dataset_csv(dataset: Dataset, path, include_components: bool = True) -> None:
    Path(path).write_text(dataset_csv(dataset, include_components))


def read_dataset_csv(path) -> Dataset:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    cols = [k for k, h in enumerate(header) if h.strip().startswith("x")]
    if not cols:
        raise ValueError(f"{path}: header has no x1..xS columns")
    comp_col = header.index("component") if "component" in header else None
    points = np.array([[float(r[k]) for k in cols] for r in rows], dtype=np.float64)
    comps = None
    if comp_col is not None:
        comps = np.array([int(r[comp_col]) for r in rows])
    return Dataset(points, comps)


def spec_to_json(spec) -> str:
    """Serialise a mixture spec as a JSON list of ``{mean, cov, count}``."""
    doc = [{"mean": c.gaussian.mean.tolist(), "cov": c.gaussian.cov.tolist(), "count": c.count} for c in spec]
    return json.dumps(doc, indent=2) + "\n"


def spec_from_json(text: str) -> list[MixtureComponent]:
    doc = json.loads(text)
    if not isinstance(doc, list) or not doc:
        raise ValueError("mixture spec must be a non-empty JSON list")
    spec = [_component(c["mean"], c["cov"], c.get("count", DEFAULT_COUNT)) for c in doc]
    if len({c.gaussian.dim for c in spec}) != 1:
        raise ValueError("all components must share one dimension")
    return spec


def resolve_spec(name_or_path) -> list[MixtureComponent]:
    """A built-in name, or the path of a JSON spec file."""
    path = Path(str(name_or_path))
    if path.suffix == ".json" or path.is_file():
        return spec_from_json(path.read_text())
    return builtin_spec(str(name_or_path))
