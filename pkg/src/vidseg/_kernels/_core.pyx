"""Compiled twins of the hot kernels in ``_py``.

Keep visit order, tie-breaks, and expression order in sync with the
fallback; the equivalence tests assert identical outputs.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPILED = True


def slic_assign(double[:, :, ::1] pixels, double[:, ::1] centers,
                double ratio2, int window):
    cdef int h = pixels.shape[0]
    cdef int w = pixels.shape[1]
    cdef int k = centers.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] best_arr = np.full((h, w), np.inf)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels_arr = np.full((h, w), -1, dtype=np.int32)
    cdef double[:, ::1] best = best_arr
    cdef int[:, ::1] labels = labels_arr
    cdef int j, x0, x1, y0, y1, x, y
    cdef double r, g, b, cx, cy, dr, dg, db, dx, dy, d2
    for j in range(k):
        r = centers[j, 0]
        g = centers[j, 1]
        b = centers[j, 2]
        cx = centers[j, 3]
        cy = centers[j, 4]
        x0 = <int>cx - window
        if x0 < 0:
            x0 = 0
        x1 = <int>cx + window + 1
        if x1 > w:
            x1 = w
        y0 = <int>cy - window
        if y0 < 0:
            y0 = 0
        y1 = <int>cy + window + 1
        if y1 > h:
            y1 = h
        for y in range(y0, y1):
            dy = y - cy
            for x in range(x0, x1):
                dx = x - cx
                dr = pixels[y, x, 0] - r
                dg = pixels[y, x, 1] - g
                db = pixels[y, x, 2] - b
                d2 = (dr * dr + dg * dg + db * db) + ratio2 * (dx * dx + dy * dy)
                if d2 < best[y, x]:
                    best[y, x] = d2
                    labels[y, x] = j
    return labels_arr


def inside_outside(cnp.uint8_t[:, ::1] boundary):
    cdef int h = boundary.shape[0]
    cdef int w = boundary.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] prob_arr = np.zeros((h, w))
    cdef double[:, ::1] prob = prob_arr
    # 8 rays: E, W, S, N, SE, SW, NE, NW
    cdef int[8] ddx = [1, -1, 0, 0, 1, -1, 1, -1]
    cdef int[8] ddy = [0, 0, 1, -1, 1, 1, -1, -1]
    cdef int x, y, d, px, py, hits
    for y in range(h):
        for x in range(w):
            if boundary[y, x]:
                prob[y, x] = 1.0
                continue
            hits = 0
            for d in range(8):
                px = x + ddx[d]
                py = y + ddy[d]
                while 0 <= px < w and 0 <= py < h:
                    if boundary[py, px]:
                        hits += 1
                        break
                    px += ddx[d]
                    py += ddy[d]
            prob[y, x] = hits / 8.0
    return prob_arr


def blockmatch(double[:, ::1] a, double[:, ::1] b, int block, int radius):
    cdef int h = a.shape[0]
    cdef int w = a.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] u_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] v_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] u = u_arr
    cdef int[:, ::1] v = v_arr
    cdef int by, bx, y1, x1, dy, dx, y, x, bdy, bdx, nz, best_nz, best_dy, best_dx
    cdef double sad, best_sad, diff
    cdef bint have_best
    for by in range(0, h, block):
        for bx in range(0, w, block):
            y1 = by + block
            if y1 > h:
                y1 = h
            x1 = bx + block
            if x1 > w:
                x1 = w
            have_best = False
            best_sad = 0.0
            best_nz = 0
            best_dy = 0
            best_dx = 0
            for dy in range(-radius, radius + 1):
                if by + dy < 0 or y1 + dy > h:
                    continue
                for dx in range(-radius, radius + 1):
                    if bx + dx < 0 or x1 + dx > w:
                        continue
                    sad = 0.0
                    for y in range(by, y1):
                        for x in range(bx, x1):
                            diff = a[y, x] - b[y + dy, x + dx]
                            if diff < 0.0:
                                diff = -diff
                            sad += diff
                    nz = 0 if (dy == 0 and dx == 0) else 1
                    if (not have_best or sad < best_sad
                            or (sad == best_sad and (nz, dy, dx) < (best_nz, best_dy, best_dx))):
                        have_best = True
                        best_sad = sad
                        best_nz = nz
                        best_dy = dy
                        best_dx = dx
            for y in range(by, y1):
                for x in range(bx, x1):
                    u[y, x] = best_dx
                    v[y, x] = best_dy
    return u_arr, v_arr


cdef class MaxFlow:
    """Dinic max-flow; mirrors the pure-Python MaxFlow class."""

    cdef public int n, source, sink
    cdef list head, cap, adj

    def __init__(self, int n):
        self.n = n
        self.source = n
        self.sink = n + 1
        self.head = []
        self.cap = []
        self.adj = [[] for _ in range(n + 2)]

    def add_arc_pair(self, int a, int b, double cap_ab, double cap_ba):
        self.adj[a].append(len(self.head))
        self.head.append(b)
        self.cap.append(cap_ab)
        self.adj[b].append(len(self.head))
        self.head.append(a)
        self.cap.append(cap_ba)

    def add_terminal(self, int i, double cap_source, double cap_sink):
        self.add_arc_pair(self.source, i, cap_source, 0.0)
        self.add_arc_pair(i, self.sink, cap_sink, 0.0)

    def add_edge(self, int i, int j, double weight):
        self.add_arc_pair(i, j, weight, weight)

    def solve(self):
        cdef int m = len(self.head)
        cdef int nn = self.n + 2
        cdef cnp.ndarray[cnp.int32_t, ndim=1] head = np.array(self.head, dtype=np.int32)
        cdef cnp.ndarray[cnp.float64_t, ndim=1] cap = np.array(self.cap, dtype=np.float64)
        # CSR adjacency preserving insertion order
        cdef cnp.ndarray[cnp.int32_t, ndim=1] adj_start = np.zeros(nn + 1, dtype=np.int32)
        cdef cnp.ndarray[cnp.int32_t, ndim=1] adj_arc = np.zeros(m, dtype=np.int32)
        cdef int node, pos = 0, i
        for node in range(nn):
            adj_start[node] = pos
            for i in self.adj[node]:
                adj_arc[pos] = i
                pos += 1
        adj_start[nn] = pos
        cdef double total = self._solve_csr(head, cap, adj_start, adj_arc)
        self.cap = cap.tolist()
        return total

    cdef double _solve_csr(self, int[:] head, double[:] cap,
                           int[:] adj_start, int[:] adj_arc):
        cdef int nn = self.n + 2
        cdef cnp.ndarray[cnp.int32_t, ndim=1] level_arr = np.empty(nn, dtype=np.int32)
        cdef cnp.ndarray[cnp.int32_t, ndim=1] queue_arr = np.empty(nn, dtype=np.int32)
        cdef cnp.ndarray[cnp.int32_t, ndim=1] ptr_arr = np.empty(nn, dtype=np.int32)
        # iterative DFS stacks: node path and the arc taken into each node
        cdef cnp.ndarray[cnp.int32_t, ndim=1] path_arr = np.empty(nn + 1, dtype=np.int32)
        cdef cnp.ndarray[cnp.int32_t, ndim=1] path_arc_arr = np.empty(nn + 1, dtype=np.int32)
        cdef int[:] level = level_arr
        cdef int[:] queue = queue_arr
        cdef int[:] ptr = ptr_arr
        cdef int[:] path = path_arr
        cdef int[:] path_arc = path_arc_arr
        cdef double total = 0.0, pushed
        cdef int qh, qt, node, a, nxt, depth, k
        while True:
            # BFS level graph
            for k in range(nn):
                level[k] = -1
            level[self.source] = 0
            queue[0] = self.source
            qh = 0
            qt = 1
            while qh < qt:
                node = queue[qh]
                qh += 1
                for k in range(adj_start[node], adj_start[node + 1]):
                    a = adj_arc[k]
                    nxt = head[a]
                    if cap[a] > 0.0 and level[nxt] < 0:
                        level[nxt] = level[node] + 1
                        queue[qt] = nxt
                        qt += 1
            if level[self.sink] < 0:
                return total
            for k in range(nn):
                ptr[k] = 0
            # blocking flow via iterative DFS with arc pointers
            while True:
                depth = 0
                path[0] = self.source
                while True:
                    node = path[depth]
                    if node == self.sink:
                        # bottleneck along path
                        pushed = cap[path_arc[1]]
                        for k in range(2, depth + 1):
                            if cap[path_arc[k]] < pushed:
                                pushed = cap[path_arc[k]]
                        for k in range(1, depth + 1):
                            a = path_arc[k]
                            cap[a] -= pushed
                            cap[a ^ 1] += pushed
                            # retreat to the shallowest saturated arc
                        total += pushed
                        for k in range(1, depth + 1):
                            if cap[path_arc[k]] <= 0.0:
                                depth = k - 1
                                break
                        continue
                    if ptr[node] < adj_start[node + 1] - adj_start[node]:
                        a = adj_arc[adj_start[node] + ptr[node]]
                        nxt = head[a]
                        if cap[a] > 0.0 and level[nxt] == level[node] + 1:
                            depth += 1
                            path[depth] = nxt
                            path_arc[depth] = a
                        else:
                            ptr[node] += 1
                    else:
                        # dead end: prune node and retreat
                        level[node] = -1
                        if depth == 0:
                            break
                        depth -= 1
                        ptr[path[depth]] += 1
                if depth == 0 and ptr[self.source] >= adj_start[self.source + 1] - adj_start[self.source]:
                    break
            # fall through to next BFS phase

    def source_side(self):
        cdef int nn = self.n + 2
        seen = np.zeros(nn, dtype=bool)
        seen[self.source] = True
        stack = [self.source]
        cap = self.cap
        head = self.head
        adj = self.adj
        while stack:
            node = stack.pop()
            for a in adj[node]:
                nxt = head[a]
                if cap[a] > 0.0 and not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        return seen[: self.n]
