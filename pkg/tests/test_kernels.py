"""Compiled extension vs numpy fallback: both paths must agree bit for bit."""

import numpy as np
import pytest

from vidseg import _kernels
from vidseg._kernels import _py

try:
    from vidseg._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None,
                                reason="compiled extension not built")


def test_dispatch_exposes_flag():
    assert isinstance(_kernels.COMPILED, bool)


@needs_core
def test_slic_assign_equivalent():
    rng = np.random.default_rng(40)
    rgb = rng.random((24, 32, 3))
    centers = np.zeros((6, 5))
    centers[:, 3] = rng.uniform(0, 32, 6)
    centers[:, 4] = rng.uniform(0, 24, 6)
    centers[:, :3] = rng.random((6, 3))
    a = _py.slic_assign(rgb, centers, 0.5, 12)
    b = _core.slic_assign(rgb, centers, 0.5, 12)
    assert np.array_equal(a, b)


@needs_core
def test_inside_outside_equivalent():
    rng = np.random.default_rng(41)
    for density in (0.05, 0.2, 0.5):
        boundary = (rng.random((20, 25)) < density).astype(np.uint8)
        a = _py.inside_outside(boundary)
        b = _core.inside_outside(boundary)
        assert np.array_equal(a, b)


@needs_core
def test_blockmatch_equivalent():
    rng = np.random.default_rng(42)
    ga = rng.integers(0, 766, (32, 40)).astype(np.float64)
    gb = rng.integers(0, 766, (32, 40)).astype(np.float64)
    ua, va = _py.blockmatch(ga, gb, 8, 3)
    ub, vb = _core.blockmatch(ga, gb, 8, 3)
    assert np.array_equal(ua, ub)
    assert np.array_equal(va, vb)


def _random_flow_problem(rng, n):
    u0 = rng.random(n) * 4
    u1 = rng.random(n) * 4
    edges = [(i, j, rng.random() * 2) for i in range(n)
             for j in range(i + 1, n) if rng.random() < 0.5]
    return u0, u1, edges


@needs_core
def test_maxflow_equivalent():
    rng = np.random.default_rng(43)
    for _ in range(50):
        n = int(rng.integers(2, 15))
        u0, u1, edges = _random_flow_problem(rng, n)
        sols = []
        for impl in (_py, _core):
            mf = impl.MaxFlow(n)
            for i in range(n):
                mf.add_terminal(i, float(u0[i]), float(u1[i]))
            for i, j, w in edges:
                mf.add_edge(i, j, float(w))
            sols.append((mf.solve(), mf.source_side()))
        assert abs(sols[0][0] - sols[1][0]) <= 1e-9
        assert np.array_equal(sols[0][1], sols[1][1])


def test_maxflow_simple_two_node():
    mf = _kernels.MaxFlow(2)
    mf.add_terminal(0, 1.0, 10.0)  # prefers label 0
    mf.add_terminal(1, 10.0, 1.0)  # prefers label 1
    mf.add_edge(0, 1, 0.5)
    flow = mf.solve()
    side = mf.source_side()
    assert np.isclose(flow, 1.0 + 1.0 + 0.5)
    assert side.tolist() == [0, 1]
