"""Numpy / pure-Python fallback for the hot kernels.

Mirrors ``_core.pyx`` operation for operation; the compiled and fallback
implementations must produce bit-identical outputs (same visit order, same
tie-breaks, IEEE arithmetic in the same expression order).
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def slic_assign(pixels, centers, ratio2, window):
    """One SLIC assignment sweep.

    pixels: (h, w, 3) float64 RGB in [0,1]; centers: (k, 5) float64 rows
    (r, g, b, cx, cy). Each pixel takes the center minimizing
    ||rgb - c_rgb||^2 + ratio2 * ||xy - c_xy||^2 among centers whose
    (cx, cy) lies within +-window; ties go to the lower center index.
    """
    h, w, _ = pixels.shape
    k = centers.shape[0]
    best = np.full((h, w), np.inf)
    labels = np.full((h, w), -1, dtype=np.int32)
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    for j in range(k):
        r, g, b, cx, cy = centers[j]
        x0 = max(int(cx) - window, 0)
        x1 = min(int(cx) + window + 1, w)
        y0 = max(int(cy) - window, 0)
        y1 = min(int(cy) + window + 1, h)
        if x0 >= x1 or y0 >= y1:
            continue
        win = pixels[y0:y1, x0:x1]
        dr = win[:, :, 0] - r
        dg = win[:, :, 1] - g
        db = win[:, :, 2] - b
        dx = xs[x0:x1] - cx
        dy = ys[y0:y1] - cy
        d2 = (dr * dr + dg * dg + db * db) + ratio2 * (
            dx[None, :] * dx[None, :] + dy[:, None] * dy[:, None]
        )
        sub = best[y0:y1, x0:x1]
        better = d2 < sub
        sub[better] = d2[better]
        labels[y0:y1, x0:x1][better] = j
    return labels


def inside_outside(boundary):
    """Fraction of the 8 axis/diagonal rays from each pixel that hit a
    boundary pixel before leaving the image; boundary pixels score 1."""
    b = boundary.astype(bool)
    h, w = b.shape
    hits = np.zeros((h, w), dtype=np.int32)

    def _axis_hit(arr):
        # hit[p] = any boundary strictly before p along axis 1
        out = np.zeros_like(arr)
        out[:, 1:] = np.logical_or.accumulate(arr[:, :-1], axis=1)
        return out

    hits += _axis_hit(b)  # west
    hits += _axis_hit(b[:, ::-1])[:, ::-1]  # east
    hits += _axis_hit(b.T).T  # north
    hits += _axis_hit(b.T[:, ::-1])[:, ::-1].T  # south

    def _diag_hit(arr):
        # hit[p] = any boundary strictly before p along the NW diagonal
        out = np.zeros_like(arr)
        for y in range(1, arr.shape[0]):
            out[y, 1:] = arr[y - 1, :-1] | out[y - 1, :-1]
        return out

    hits += _diag_hit(b)  # north-west
    hits += _diag_hit(b[:, ::-1])[:, ::-1]  # north-east
    hits += _diag_hit(b[::-1])[::-1]  # south-west
    hits += _diag_hit(b[::-1, ::-1])[::-1, ::-1]  # south-east

    prob = hits.astype(np.float64) / 8.0
    prob[b] = 1.0
    return prob


def blockmatch(a, b, block, radius):
    """Per-block integer displacement minimizing SAD.

    a, b: (h, w) float64 grayscale. Returns (u, v) int32 arrays broadcast
    to pixels. Candidates keep the target window fully inside b; ties break
    toward zero displacement, then lexicographic (dy, dx).
    """
    h, w = a.shape
    u = np.zeros((h, w), dtype=np.int32)
    v = np.zeros((h, w), dtype=np.int32)
    for by in range(0, h, block):
        for bx in range(0, w, block):
            y1 = min(by + block, h)
            x1 = min(bx + block, w)
            src = a[by:y1, bx:x1]
            best = None
            for dy in range(-radius, radius + 1):
                ty0, ty1 = by + dy, y1 + dy
                if ty0 < 0 or ty1 > h:
                    continue
                for dx in range(-radius, radius + 1):
                    tx0, tx1 = bx + dx, x1 + dx
                    if tx0 < 0 or tx1 > w:
                        continue
                    sad = float(np.abs(src - b[ty0:ty1, tx0:tx1]).sum())
                    key = (sad, 0 if dy == 0 and dx == 0 else 1, dy, dx)
                    if best is None or key < best:
                        best = key
                        bdy, bdx = dy, dx
            u[by:y1, bx:x1] = bdx
            v[by:y1, bx:x1] = bdy
    return u, v


class MaxFlow:
    """Dinic max-flow on float capacities with deterministic arc order.

    Nodes are 0..n-1; source = n, sink = n+1. Arcs are stored as parallel
    lists; arc i and i^1 are residual partners.
    """

    def __init__(self, n):
        self.n = n
        self.source = n
        self.sink = n + 1
        self.head = []  # target node per arc
        self.cap = []  # residual capacity per arc
        self.adj = [[] for _ in range(n + 2)]  # arc indices per node

    def add_arc_pair(self, a, b, cap_ab, cap_ba):
        self.adj[a].append(len(self.head))
        self.head.append(b)
        self.cap.append(float(cap_ab))
        self.adj[b].append(len(self.head))
        self.head.append(a)
        self.cap.append(float(cap_ba))

    def add_terminal(self, i, cap_source, cap_sink):
        self.add_arc_pair(self.source, i, cap_source, 0.0)
        self.add_arc_pair(i, self.sink, cap_sink, 0.0)

    def add_edge(self, i, j, weight):
        self.add_arc_pair(i, j, weight, weight)

    def _bfs_levels(self):
        level = [-1] * (self.n + 2)
        level[self.source] = 0
        queue = [self.source]
        for node in queue:
            for a in self.adj[node]:
                nxt = self.head[a]
                if self.cap[a] > 0.0 and level[nxt] < 0:
                    level[nxt] = level[node] + 1
                    queue.append(nxt)
        return level if level[self.sink] >= 0 else None

    def _dfs(self, level, ptr, node, pushed):
        if node == self.sink:
            return pushed
        adj = self.adj[node]
        while ptr[node] < len(adj):
            a = adj[ptr[node]]
            nxt = self.head[a]
            if self.cap[a] > 0.0 and level[nxt] == level[node] + 1:
                got = self._dfs(level, ptr, nxt, min(pushed, self.cap[a]))
                if got > 0.0:
                    self.cap[a] -= got
                    self.cap[a ^ 1] += got
                    return got
            ptr[node] += 1
        return 0.0

    def solve(self):
        """Run to completion; returns total flow = min-cut value."""
        import sys

        depth = 4 * (self.n + 16)
        if sys.getrecursionlimit() < depth:
            sys.setrecursionlimit(depth)
        total = 0.0
        while True:
            level = self._bfs_levels()
            if level is None:
                return total
            ptr = [0] * (self.n + 2)
            while True:
                pushed = self._dfs(level, ptr, self.source, np.inf)
                if pushed <= 0.0:
                    break
                total += pushed

    def source_side(self):
        """Nodes reachable from the source in the residual graph."""
        seen = np.zeros(self.n + 2, dtype=bool)
        seen[self.source] = True
        queue = [self.source]
        for node in queue:
            for a in self.adj[node]:
                nxt = self.head[a]
                if self.cap[a] > 0.0 and not seen[nxt]:
                    seen[nxt] = True
                    queue.append(nxt)
        return seen[: self.n]
