"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--n 2000] [--c 6] [--repeat 5]

Both implementations are imported directly, so the ITISC_DISABLE_NUMBA
flag does not matter here. numba is compiled once before timing.
"""

import argparse
import timeit

import numpy as np

from itisc._kernels import LINKAGE_CODES, numpy_impl

try:
    from itisc._kernels import numba_impl
except ImportError:  # pragma: no cover
    numba_impl = None


def cases(n, c, s, n_hc, rng):
    X = rng.normal(size=(n, s))
    Y = rng.normal(size=(c, s))
    E = numpy_impl.sq_dist_matrix(X, Y)
    L = rng.normal(size=(n, c))
    H = rng.normal(size=(n_hc, s))
    D = numpy_impl.sq_dist_matrix(H, H)
    ward = LINKAGE_CODES["ward"]
    return {
        "sq_dist_matrix": lambda m: m.sq_dist_matrix(X, Y),
        "soft_assign": lambda m: m.soft_assign(E, 1.0),
        "weighted_means": lambda m: m.weighted_means(X, L),
        "nearest": lambda m: m.nearest(X, Y),
        f"agglomerate(n={n_hc})": lambda m: m.agglomerate(D.copy(), 3, ward),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2000, help="points")
    p.add_argument("--c", type=int, default=6, help="centers")
    p.add_argument("--s", type=int, default=2, help="dimension")
    p.add_argument("--n-hc", type=int, default=300, help="points for agglomeration")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if numba_impl is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, fn in cases(args.n, args.c, args.s, args.n_hc, rng).items():
        fn(numba_impl)  # compile
        times = {}
        for label, mod in (("numpy", numpy_impl), ("numba", numba_impl)):
            number = 1 if name.startswith("agglomerate") else 20
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat))
            times[label] = 1e3 * best / number
        print(f"{name:<24}{times['numpy']:>12.3f}{times['numba']:>12.3f}{times['numpy'] / times['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
