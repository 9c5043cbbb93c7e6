"""Compare the compiled and numpy enumeration kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so the environment switch is not
needed.  Each case is checked for agreement before it is timed.
"""
import argparse
import time

import numpy as np

from nullproj import kernels_py
from nullproj.rng import make_rng

try:
    from nullproj import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def rip_case(n, m, k, seed):
    Phi = make_rng(seed).standard_normal((m, n)) / np.sqrt(m)
    return np.ascontiguousarray(Phi.T @ Phi), k


def l0_case(n, m, s, seed):
    rng = make_rng(seed)
    Phi = rng.standard_normal((m, n))
    x = np.zeros(n)
    x[rng.choice(n, s, replace=False)] = rng.standard_normal(s)
    return np.ascontiguousarray(Phi), Phi @ x, s


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the numpy kernels are available")

    rows = []
    for n, m, k in [(12, 7, 2), (16, 12, 2), (20, 12, 3), (24, 16, 4)]:
        gram, k = rip_case(n, m, k, seed=n * 100 + k)
        t_py, (d_py, s_py) = best_of(lambda: kernels_py.rip_extremes(gram, k), args.repeat)
        if _kernels is not None:
            t_cy, (d_cy, s_cy) = best_of(lambda: _kernels.rip_extremes(gram, k), args.repeat)
            assert abs(d_cy - d_py) < 1e-10 and tuple(s_cy) == tuple(s_py), (n, k)
        else:
            t_cy = float("nan")
        rows.append((f"rip n={n} k={k}", t_py, t_cy))

    for n, m, s in [(12, 7, 2), (16, 9, 3), (20, 10, 3), (24, 12, 4)]:
        phi, y, s = l0_case(n, m, s, seed=n * 10 + s)
        t_py, out_py = best_of(lambda: kernels_py.l0_search(phi, y, s, 1e-8), args.repeat)
        if _kernels is not None:
            t_cy, out_cy = best_of(lambda: _kernels.l0_search(phi, y, s, 1e-8), args.repeat)
            assert tuple(out_cy[0]) == tuple(out_py[0]), (n, s)
            assert np.allclose(out_cy[1], out_py[1], atol=1e-8), (n, s)
        else:
            t_cy = float("nan")
        rows.append((f"l0 n={n} s={s}", t_py, t_cy))

    print(f"{'case':18s} {'numpy (ms)':>12s} {'cython (ms)':>12s} {'speedup':>9s}")
    for name, t_py, t_cy in rows:
        print(f"{name:18s} {1e3 * t_py:12.2f} {1e3 * t_cy:12.2f} {t_py / t_cy:9.1f}x")


if __name__ == "__main__":
    main()
