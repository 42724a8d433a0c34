"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``criterion N: PASS|FAIL`` line with the
measured quantities, then asserts.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from itisc.baselines import fcm_solve, hierarchical_solve, kmeans_solve
from itisc.core import DistortionKind, Rng, Temperatures, random_init
from itisc.distortion import distortion_matrix
from itisc.engine import ao_solve, full_objective, reform_gradient, reform_objective, reform_solve, update_membership, update_weights
from itisc.experiments import DEFAULT_SEEDS, boundary_table, shift_experiment, t2_sweep
from itisc.metrics import GaussianSpec, gaussian_kl, m_boundary_dist, weight_kl_uniform
from itisc.models import fit_model
from itisc.optimize import minimize
from itisc.synth import builtin_spec, sample_mixture

KINDS = (DistortionKind.SQUARED, DistortionKind.LOG)


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {number}: {detail}"


def random_problem(g):
    n, c, s = int(g.integers(5, 60)), int(g.integers(1, 7)), int(g.integers(1, 5))
    X = g.normal(size=(n, s)) * g.uniform(0.3, 3.0)
    Y = g.normal(size=(c, s)) * g.uniform(0.3, 3.0)
    return X, Y


def fd_gradient(X, Y, t, kind, h=1e-5):
    g = np.zeros_like(Y)
    for idx in np.ndindex(Y.shape):
        Yp, Ym = Y.copy(), Y.copy()
        Yp[idx] += h
        Ym[idx] -= h
        g[idx] = (reform_objective(X, Yp, t, kind) - reform_objective(X, Ym, t, kind)) / (2 * h)
    return g


def matched_max_diff(A, B):
    cost = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
    r, c = linear_sum_assignment(cost)
    return float(np.abs(A[r] - B[c]).max())


def count_violations(values):
    """Inversions of a sequence that should be non-increasing: (count, largest)."""
    rises = [b - a for a, b in zip(values, values[1:]) if b > a]
    return len(rises), max(rises, default=0.0)


@pytest.fixture(scope="module")
def c3():
    return sample_mixture(builtin_spec("c3-default"), Rng(0))


def test_criterion_1_reformulation_identity(capsys):
    g = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        X, Y = random_problem(g)
        t = Temperatures(*np.exp(g.uniform(math.log(0.1), math.log(10.0), 2)))
        for kind in KINDS:
            dm = distortion_matrix(X, Y)
            u, w = update_membership(dm, t.t1, kind), update_weights(dm, t, kind)
            err = abs(reform_objective(X, Y, t, kind) - full_objective(X, Y, u, w, t, kind).total)
            worst = max(worst, err)
    elapsed = time.perf_counter() - start
    verdict(capsys, 1, worst < 1e-9 and elapsed < 5, f"max |R - F| = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_gradient(capsys):
    g = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for t1 in (0.5, 1.0, 2.0):
        for t2 in (0.3, 1.0, 2.0):
            for kind in KINDS:
                for _ in range(20):
                    X, Y = random_problem(g)
                    t = Temperatures(t1, t2)
                    an = reform_gradient(X, Y, t, kind)
                    fd = fd_gradient(X, Y, t, kind)
                    rel = np.linalg.norm(an - fd) / max(np.linalg.norm(fd), 1e-8)
                    worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    verdict(capsys, 2, worst < 1e-5 and elapsed < 30, f"max relative error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_3_fcm_equivalence(capsys, c3):
    init = random_init(c3, 3, Rng(0)).centers
    ao, fcm = [], []
    ao_solve(c3, 3, (1.0, 1.0), "log", init_centers=init, callback=lambda it, y, u, w: ao.append(y))
    fcm_state = fcm_solve(c3, 3, 2.0, init_centers=init, callback=lambda it, y, u: fcm.append(y))
    same_length = len(ao) == len(fcm)
    sweep_diff = max(float(np.abs(a - b).max()) for a, b in zip(ao, fcm))

    fi = reform_solve(c3, 3, (1.0, 1.0), "log", init_centers=init)
    center_diff = matched_max_diff(fi.centers, fcm_state.centers)

    table = boundary_table(c3, ["fcm", "fuzzy-itisc-r:t2=1"], 3, ms=(1,), seeds=DEFAULT_SEEDS)
    a = table.value(algorithm="fcm(m=2)", metric="MaxBoundaryDist")
    b = table.value(algorithm="fuzzy-itisc-r(t1=1,t2=1)", metric="MaxBoundaryDist")
    ok = same_length and sweep_diff < 1e-9 and center_diff < 1e-4 and abs(a - b) < 0.05
    verdict(capsys, 3, ok, f"{len(ao)} sweeps, max per-sweep diff {sweep_diff:.1e}, matched R-vs-FCM center diff "
                           f"{center_diff:.1e}, MaxBoundaryDist FCM {a:.4f} vs FI(T2=1) {b:.4f}")


def test_criterion_4_t2_trend(capsys):
    grid = (2.0, 1.5, 1.0, 0.7, 0.5, 0.3, 0.1)
    start = time.perf_counter()
    problems = []
    summary = []
    for name, c in (("c2", 2), ("c3-default", 3), ("c4", 4), ("c6", 6)):
        X = sample_mixture(builtin_spec(name), Rng(0))
        rep = t2_sweep(X, c, grid=grid, seeds=DEFAULT_SEEDS)
        for metric in ("MaxBoundaryDist", "10-BoundaryDist"):
            col = [rep.value(param=f"C={c};T2={t:g}", metric=metric) for t in grid]
            n_inv, largest = count_violations(col)
            summary.append(f"{name}/{metric}: {col[0]:.2f}->{col[-1]:.2f}")
            if n_inv > 1 or largest >= 0.05:
                problems.append(f"{name}/{metric} has {n_inv} inversion(s), largest {largest:.3f}")
    elapsed = time.perf_counter() - start
    detail = "; ".join(problems) if problems else ", ".join(summary)
    verdict(capsys, 4, not problems and elapsed < 120, f"{detail}; {elapsed:.1f}s")


def test_criterion_5_extreme(capsys):
    start = time.perf_counter()
    spec = builtin_spec("extreme")
    data = sample_mixture(spec, Rng(0))
    X = data.points
    groups = [X[data.components == k].mean(axis=0) for k in (0, 2)]

    def worst_group(centers):
        return max(float(distortion_matrix(mu[None, :], centers).min()) for mu in groups)

    fi = fit_model(X, "fuzzy-itisc-r", 3, seed=0, params={"t2": 0.1})
    others = {
        "kmeans": fit_model(X, "kmeans", 3, seed=0),
        "fcm": fit_model(X, "fcm", 3, seed=0),
        "ward": fit_model(X, "hc", 3, params={"linkage": "ward"}),
    }
    fi_worst = worst_group(fi.centers)
    other_worst = {k: worst_group(m.centers) for k, m in others.items()}
    fi_mbd = m_boundary_dist(X, fi.centers, 1, membership=fi.membership).value
    km_mbd = m_boundary_dist(X, others["kmeans"].centers, 1, labels=others["kmeans"].labels).value
    elapsed = time.perf_counter() - start
    ok = fi_worst <= 4 and all(v > 4 for v in other_worst.values()) and fi_mbd < km_mbd and elapsed < 10
    detail = (f"FI worst group sq. dist {fi_worst:.2f} (need <= 4); "
              + ", ".join(f"{k} {v:.2f}" for k, v in other_worst.items())
              + f" (need > 4); MaxBoundaryDist FI {fi_mbd:.2f} vs k-means {km_mbd:.2f}; {elapsed:.1f}s")
    verdict(capsys, 5, ok, detail)


def test_criterion_6_shift(capsys):
    start = time.perf_counter()
    distances = (1.5, 2.0, 2.5, 3.0)
    rep = shift_experiment(builtin_spec("c3-default"), distances=distances, n_angles=5,
                           models=("fuzzy-itisc-r:t2=0.1", "kmeans"))
    ratios = [r.value for r in rep.select(metric="win_ratio")]
    cells = len(rep.select(metric="KL"))
    drops = [a - b for a, b in zip(ratios, ratios[1:]) if b < a]
    trend_ok = len(drops) <= 1 and all(d <= 0.05 for d in drops)
    elapsed = time.perf_counter() - start
    ok = cells == 125 * len(distances) and ratios[-1] >= 0.8 and trend_ok and elapsed < 180
    verdict(capsys, 6, ok, "win ratio vs k-means at S=1.5/2/2.5/3: "
            + "/".join(f"{r:.3f}" for r in ratios) + f"; {elapsed:.1f}s")


def test_criterion_7_weights(capsys, c3):
    maxes = []
    kls = []
    for t2 in (0.7, 0.5, 0.3):
        m = fit_model(c3, "fuzzy-itisc-r", 3, seed=0, params={"t2": t2})
        maxes.append(float(m.weights.max()))
        kls.append(weight_kl_uniform(m.weights))
    g = np.random.default_rng(7)
    for _ in range(1000):
        w = g.dirichlet(np.full(int(g.integers(1, 50)), g.uniform(0.05, 5)))
        kls.append(weight_kl_uniform(w))
    flat = fit_model(c3, "fuzzy-itisc-r", 3, seed=0, params={"t2": 1e6})
    dev = float(np.abs(flat.weights - 1.0 / c3.n).max())
    ok = maxes[0] < maxes[1] < maxes[2] and min(kls) >= 0 and dev < 1e-6
    verdict(capsys, 7, ok, "max weight at T2=0.7/0.5/0.3: " + "/".join(f"{v:.4f}" for v in maxes)
            + f"; min KL(w||uniform) {min(kls):.2e}; T2=1e6 deviation {dev:.1e}")


def test_criterion_8_kl(capsys):
    I2 = np.eye(2)
    z = gaussian_kl(GaussianSpec([0.3, -1.0], [[2.0, 0.5], [0.5, 1.0]]),
                    GaussianSpec([0.3, -1.0], [[2.0, 0.5], [0.5, 1.0]]))
    half = gaussian_kl(GaussianSpec([0.0, 0.0], I2), GaussianSpec([1.0, 0.0], I2))
    scaled = gaussian_kl(GaussianSpec([0.0, 0.0], I2), GaussianSpec([0.0, 0.0], 2 * I2))
    hand_ok = abs(z) < 1e-10 and abs(half - 0.5) < 1e-10 and abs(scaled - 0.5 * (math.log(4) - 1)) < 1e-10
    g = np.random.default_rng(8)
    lowest = np.inf
    for _ in range(1000):
        n = int(g.integers(1, 6))
        A, B = g.normal(size=(n, n)), g.normal(size=(n, n))
        kl = gaussian_kl(GaussianSpec(g.normal(size=n), A @ A.T + 0.05 * np.eye(n)),
                         GaussianSpec(g.normal(size=n), B @ B.T + 0.05 * np.eye(n)))
        lowest = min(lowest, kl)
    verdict(capsys, 8, hand_ok and lowest >= 0,
            f"hand cases {z:.1e}, {half:.12f}, {scaled:.12f}; min over 1000 random pairs {lowest:.2e}")


def test_criterion_9_baselines(capsys):
    x = np.array([0.0, 1.0, 9.0, 10.0])
    best = min(
        sum(((x[lab == k] - x[lab == k].mean()) ** 2).sum() for k in (0, 1))
        for lab in (np.array(p) for p in np.ndindex(2, 2, 2, 2)) if len(set(lab.tolist())) == 2
    )
    km = kmeans_solve(x, 2, Rng(0))
    km_ok = abs(km.cost - best) < 1e-12 and sorted(km.centers[:, 0].tolist()) == [0.5, 9.5]
    hc = hierarchical_solve([0.0, 1.0, 5.0], 2, "single").labels
    hc_ok = hc[0] == hc[1] != hc[2]

    def rosen(v):
        return (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2

    def rosen_grad(v):
        return np.array([-2 * (1 - v[0]) - 400 * v[0] * (v[1] - v[0] ** 2), 200 * (v[1] - v[0] ** 2)])

    res = minimize(rosen, rosen_grad, [-1.2, 1.0], tol=1e-8)
    opt_err = float(np.abs(res.x - 1.0).max())
    ok = km_ok and hc_ok and opt_err < 1e-5
    verdict(capsys, 9, ok, f"k-means SSE {km.cost} vs exhaustive {best}; single linkage labels {hc.tolist()}; "
                           f"Rosenbrock error {opt_err:.1e} ({res.status})")


CLI_COMMANDS = [
    ["gen", "c3-default", "--seed", "7"],
    ["fit", "c3", "fuzzy-itisc-r", "-C", "3", "--t2", "0.5", "--membership"],
    ["boundary", "c3", "--models", "kmeans", "fcm", "hc", "fi:t2=0.1", "-C", "3", "--M", "1", "10"],
    ["t2-sweep", "c2", "-C", "2", "--grid", "1", "0.5", "0.1", "--format", "json"],
    ["weights-trace", "c3", "-C", "3", "--seed", "0"],
    ["shift-exp", "c3", "--S", "2", "--n-angles", "3", "--seed", "1"],
]


def test_criterion_10_determinism(capsys, tmp_path):
    model = tmp_path / "model.json"
    subprocess.run([sys.executable, "-m", "itisc.cli", "fit", "c2", "kmeans", "-C", "2", "--out", str(model)],
                   check=True, capture_output=True)
    commands = CLI_COMMANDS + [["predict", str(model), "c2"]]
    mismatched = []
    for argv in commands:
        outs = [subprocess.run([sys.executable, "-m", "itisc.cli", *argv], check=True, capture_output=True).stdout
                for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            mismatched.append(argv[0])
    verdict(capsys, 10, not mismatched,
            f"{len(commands)} commands run twice; mismatches: {', '.join(mismatched) or 'none'}")
