"""Time the numba and numpy convolution backends on the same grids.

    python benchmarks/bench_backends.py [--points N] [--repeat R]

The first numba call compiles (or loads the on-disk cache); it is timed
separately and excluded from the steady-state numbers.
"""
import argparse
import time

import numpy as np

from holder_approx import funcspace as fs
from holder_approx import kernel as kn
from holder_approx._backend import HAVE_NUMBA
from holder_approx.convolution import convolve_grid

CASES = [
    ("picard, bump(0.5), lam=100", kn.picard(), 100.0, fs.holder_bump(0.5), 0),
    ("gauss-weierstrass, bump(0.5), lam=30", kn.gauss_weierstrass(), 30.0, fs.holder_bump(0.5), 0),
    ("picard m=1, bump antiderivative, lam=100", kn.picard(), 100.0, fs.zero_mean_bump_antiderivative(0.5), 1),
    ("poisson, |sin|, lam=100", kn.poisson(), 100.0, fs.abs_sin(1.0), 0),
    ("fejer, cosine, lam=20", kn.fejer(), 20.0, fs.cosine(), 0),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    xs = np.linspace(-3.0, 3.0, args.points)
    t0 = time.perf_counter()
    convolve_grid(kn.picard(), 10.0, fs.cosine(), xs[:2], backend="numba")
    print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.2f} s")
    print(f"{'case':44s} {'numpy s':>9s} {'numba s':>9s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, kernel, lam, f, m in CASES:
        run = lambda b: convolve_grid(kernel, lam, f, xs, m=m, abs_tol=1e-10, rel_tol=1e-10, backend=b)
        convolve_grid(kernel, lam, f, xs[:4], m=m, backend="numba")
        t_np, a = best_of(lambda: run("numpy"), args.repeat)
        t_nb, b = best_of(lambda: run("numba"), args.repeat)
        diff = float(np.max(np.abs(a.values - b.values)))
        print(f"{label:44s} {t_np:9.3f} {t_nb:9.3f} {t_np / t_nb:8.2f} {diff:11.2e}")


if __name__ == "__main__":
    main()
