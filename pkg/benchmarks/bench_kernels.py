"""Benchmark the compiled kernels against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Imports both implementations directly, so no environment variable is needed.
"""

import time

import numpy as np

from vidseg._kernels import _py

try:
    from vidseg._kernels import _core
except ImportError:
    _core = None


def _time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_slic(impl):
    rng = np.random.default_rng(0)
    rgb = rng.random((120, 160, 3))
    centers = np.zeros((80, 5))
    xs, ys = np.meshgrid(np.linspace(4, 156, 10), np.linspace(4, 116, 8))
    centers[:, 3] = xs.ravel()
    centers[:, 4] = ys.ravel()
    centers[:, :3] = rng.random((80, 3))
    return _time(lambda: impl.slic_assign(rgb, centers, 0.44, 15))


def bench_inside_outside(impl):
    rng = np.random.default_rng(1)
    boundary = (rng.random((120, 160)) < 0.05).astype(np.uint8)
    return _time(lambda: impl.inside_outside(boundary))


def bench_blockmatch(impl):
    rng = np.random.default_rng(2)
    ga = rng.integers(0, 766, (120, 160)).astype(np.float64)
    gb = np.roll(ga, 2, axis=1)
    return _time(lambda: impl.blockmatch(ga, gb, 8, 4))


def bench_maxflow(impl):
    rng = np.random.default_rng(3)
    n = 2000
    u0 = rng.random(n) * 4
    u1 = rng.random(n) * 4
    edges = [(i, i + 1, rng.random()) for i in range(n - 1)]
    edges += [(int(rng.integers(n)), int(rng.integers(n)), rng.random())
              for _ in range(3 * n)]

    def run():
        mf = impl.MaxFlow(n)
        for i in range(n):
            mf.add_terminal(i, float(u0[i]), float(u1[i]))
        for i, j, w in edges:
            if i != j:
                mf.add_edge(i, j, float(w))
        mf.solve()

    return _time(run, repeats=3)


def main():
    benches = [
        ("slic_assign 160x120 K=80", bench_slic),
        ("inside_outside 160x120", bench_inside_outside),
        ("blockmatch 160x120 b=8 r=4", bench_blockmatch),
        ("maxflow n=2000 m~8000", bench_maxflow),
    ]
    print(f"{'kernel':<30}{'fallback':>12}{'compiled':>12}{'speedup':>10}")
    for name, bench in benches:
        t_py = bench(_py)
        if _core is None:
            print(f"{name:<30}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")
            continue
        t_c = bench(_core)
        print(f"{name:<30}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
              f"{t_py / t_c:>9.1f}x")
    if _core is None:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
