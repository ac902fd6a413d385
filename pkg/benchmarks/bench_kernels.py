"""Time the numba and numpy versions of the Monte-Carlo kernels on identical inputs.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeats 3]

Both backends are called directly, so RAGD_NUMBA does not matter here.
Each row also reports the largest disagreement between the two outputs.
"""

import argparse
import time

import numpy as np

from ragd import _kernels as kern
from ragd._accel import HAVE_NUMBA


def _best(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def _triangles(rng, n, kind):
    hi = 3.0 if kind == "hyper" else 1.2
    return rng.uniform(0, hi, n), rng.uniform(0, hi, n), rng.uniform(0, np.pi, n)


def _quadruples(rng, n, kind, dim=4):
    X = kern.random_points(kind, rng, n, dim)
    r = 0.3
    pts = [kern.exp_batch(kind, X, kern.random_tangents(kind, rng, X, r)) for _ in range(3)]
    return (X, *pts)


def _max_diff(a, b):
    return max(float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float)))) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    n_quad = max(1, args.n // 10)
    cases = [
        ("hyper_sandwich", kern.hyper_sandwich_np, kern.hyper_sandwich_nb, _triangles(rng, args.n, "hyper")),
        ("sphere_sandwich", kern.sphere_sandwich_np, kern.sphere_sandwich_nb, _triangles(rng, args.n, "sphere")),
        ("distortion_sphere", kern.distortion_np, kern.distortion_nb,
         ("sphere", *_quadruples(rng, n_quad, "sphere"))),
        ("distortion_hyper", kern.distortion_np, kern.distortion_nb,
         ("hyper", *_quadruples(rng, n_quad, "hyper"))),
    ]
    print(f"{'kernel':<18} {'n':>9} {'numpy s':>10} {'numba s':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, f_np, f_nb, inputs in cases:
        f_nb(*(a[:8] if isinstance(a, np.ndarray) else a for a in inputs))  # compile outside the timing
        t_np, out_np = _best(f_np, inputs, args.repeats)
        t_nb, out_nb = _best(f_nb, inputs, args.repeats)
        n = len(inputs[0]) if isinstance(inputs[0], np.ndarray) else len(inputs[1])
        print(f"{name:<18} {n:>9} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>8.2f} {_max_diff(out_np, out_nb):>11.2e}")


if __name__ == "__main__":
    main()
