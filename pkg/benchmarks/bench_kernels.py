"""Compiled versus numpy Hankel kernel assembly.

Usage: python benchmarks/bench_kernels.py [N ...]
"""
import sys
import timeit

import numpy as np

from helmshape import _kernels_py

try:
    from helmshape import _kernels
except ImportError:
    _kernels = None


def nodes(N):
    phi = 2 * np.pi * np.arange(N) / N
    r = 1.0 + 0.2 * np.cos(2 * phi)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def bench(N, kappa=2.0, repeat=5):
    x = nodes(N)
    y = x + 0.01
    rows = {}
    impls = {"python": _kernels_py.hankel_pairs}
    if _kernels is not None:
        impls["cython"] = _kernels.hankel_pairs
    ref = None
    for name, fn in impls.items():
        n = max(1, int(2e6 // (N * N)))
        best = min(timeit.repeat(lambda: fn(y, x, kappa), number=n, repeat=repeat)) / n
        out = fn(y, x, kappa)
        if ref is None:
            ref = out
            err = 0.0
        else:
            err = max(float(np.max(np.abs(a - b))) for a, b in zip(out, ref))
        rows[name] = (best, err)
    return rows


def main(argv):
    sizes = [int(a) for a in argv] or [64, 128, 256, 512]
    if _kernels is None:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'N':>6} {'backend':>8} {'ms':>10} {'speedup':>8} {'max diff':>10}")
    for N in sizes:
        rows = bench(N)
        base = rows["python"][0]
        for name, (sec, err) in rows.items():
            print(f"{N:>6} {name:>8} {1e3 * sec:>10.3f} {base / sec:>8.2f} {err:>10.1e}")


if __name__ == "__main__":
    main(sys.argv[1:])
