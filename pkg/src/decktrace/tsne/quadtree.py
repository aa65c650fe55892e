"""Quadtree over 2-D embedding points.

Array-backed and JIT-compiled: nodes live in flat parallel arrays so the
hot build/traverse loops run under numba. Coincident points are chained
on one leaf instead of splitting forever; a depth cap bounds splits for
near-coincident points. Each node tracks its subtree's point count and
center of mass, which is all the repulsive-force approximation needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_DEPTH = 64
_NO_NODE = -1
_NO_POINT = -1


@njit(cache=True)
def _build_arrays(points, cx0, cy0, half0, capacity):
    """Insert all points; returns node arrays and count, or n_nodes = -1
    when capacity is exhausted (caller retries with a bigger buffer)."""
    n = points.shape[0]
    cx = np.zeros(capacity)
    cy = np.zeros(capacity)
    half = np.zeros(capacity)
    child = np.full(capacity, _NO_NODE, dtype=np.int64)
    count = np.zeros(capacity, dtype=np.int64)
    sx = np.zeros(capacity)
    sy = np.zeros(capacity)
    head = np.full(capacity, _NO_POINT, dtype=np.int64)
    next_pt = np.full(n, _NO_POINT, dtype=np.int64)

    cx[0], cy[0], half[0] = cx0, cy0, half0
    n_nodes = 1

    for p in range(n):
        x = points[p, 0]
        y = points[p, 1]
        node = 0
        depth = 0
        while True:
            count[node] += 1
            sx[node] += x
            sy[node] += y
            if child[node] == _NO_NODE:
                h = head[node]
                if h == _NO_POINT:
                    head[node] = p
                    break
                if (points[h, 0] == x and points[h, 1] == y) or depth >= MAX_DEPTH:
                    next_pt[p] = h  # coincident (or depth-capped) chain
                    head[node] = p
                    break
                # split: allocate 4 children, push the existing chain down
                if n_nodes + 4 > capacity:
                    return (cx, cy, half, child, count, sx, sy, head, next_pt, -1)
                first = n_nodes
                n_nodes += 4
                child[node] = first
                hq = half[node] / 2.0
                for q in range(4):
                    c = first + q
                    cx[c] = cx[node] + (hq if q & 1 else -hq)
                    cy[c] = cy[node] + (hq if q & 2 else -hq)
                    half[c] = hq
                hx = points[h, 0]
                hy = points[h, 1]
                q = (1 if hx > cx[node] else 0) + (2 if hy > cy[node] else 0)
                dest = first + q
                # chained points share coordinates; move them wholesale
                chain_len = 0
                pt = h
                while pt != _NO_POINT:
                    chain_len += 1
                    pt = next_pt[pt]
                head[dest] = h
                head[node] = _NO_POINT
                count[dest] += chain_len
                sx[dest] += hx * chain_len
                sy[dest] += hy * chain_len
                # fall through: descend for the new point
            q = (1 if x > cx[node] else 0) + (2 if y > cy[node] else 0)
            node = child[node] + q
            depth += 1
    return (cx, cy, half, child, count, sx, sy, head, next_pt, n_nodes)


@njit(cache=True)
def _repulsion_arrays(
    points, cx, cy, half, child, count, sx, sy, head, next_pt, theta
):
    """Barnes-Hut repulsive numerators and the partition sum Z.

    For each point i accumulates sum_j w_ij^2 (y_i - y_j) and
    z_i = sum_j w_ij with w = 1 / (1 + d^2); a node of c points stands
    in for its members when  node_width / distance < theta.
    """
    n = points.shape[0]
    rep = np.zeros((n, 2))
    zsum = 0.0
    theta2 = theta * theta
    stack = np.empty(4 * MAX_DEPTH + 8, dtype=np.int64)
    for i in range(n):
        xi = points[i, 0]
        yi = points[i, 1]
        rx = 0.0
        ry = 0.0
        zi = 0.0
        sp = 0
        stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            c = count[node]
            if c == 0:
                continue
            if child[node] == _NO_NODE:
                pt = head[node]
                while pt != _NO_POINT:
                    if pt != i:
                        dx = xi - points[pt, 0]
                        dy = yi - points[pt, 1]
                        w = 1.0 / (1.0 + dx * dx + dy * dy)
                        zi += w
                        w2 = w * w
                        rx += w2 * dx
                        ry += w2 * dy
                    pt = next_pt[pt]
                continue
            dx = xi - sx[node] / c
            dy = yi - sy[node] / c
            d2 = dx * dx + dy * dy
            width = 2.0 * half[node]
            if width * width < theta2 * d2:
                w = 1.0 / (1.0 + d2)
                zi += c * w
                w2 = w * w
                rx += c * w2 * dx
                ry += c * w2 * dy
            else:
                base = child[node]
                for q in range(4):
                    stack[sp] = base + q
                    sp += 1
        rep[i, 0] = rx
        rep[i, 1] = ry
        zsum += zi
    return rep, zsum


@dataclass(frozen=True)
class Quadtree:
    """Built tree plus the point set it was built over."""

    points: np.ndarray
    cx: np.ndarray
    cy: np.ndarray
    half: np.ndarray
    child: np.ndarray
    count: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    head: np.ndarray
    next_pt: np.ndarray
    n_nodes: int

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def root_mass(self) -> int:
        return int(self.count[0])

    def center_of_mass(self, node: int = 0) -> tuple[float, float]:
        c = self.count[node]
        return (self.sx[node] / c, self.sy[node] / c)

    def leaf_of_point(self, p: int) -> int:
        """Index of the leaf holding point p (walks down from the root)."""
        x, y = self.points[p]
        node = 0
        while self.child[node] != _NO_NODE:
            q = (1 if x > self.cx[node] else 0) + (2 if y > self.cy[node] else 0)
            node = self.child[node] + q
        return node

    def leaf_points(self, node: int) -> list[int]:
        pts = []
        pt = self.head[node]
        while pt != _NO_POINT:
            pts.append(int(pt))
            pt = int(self.next_pt[pt])
        return pts

    def validate(self) -> None:
        """Structural invariants: every point in exactly one leaf, node
        mass equals the sum of child masses, root box contains all points."""
        seen = np.zeros(self.n_points, dtype=bool)
        for node in range(self.n_nodes):
            if self.child[node] == _NO_NODE:
                for p in self.leaf_points(node):
                    if seen[p]:
                        raise ValueError(f"point {p} appears in two leaves")
                    seen[p] = True
            else:
                kids = self.child[node] + np.arange(4)
                if self.count[node] != self.count[kids].sum():
                    raise ValueError(f"node {node} mass != sum of child masses")
        if not seen.all():
            raise ValueError("some points missing from leaves")
        hx = self.cx[0] - self.half[0], self.cx[0] + self.half[0]
        hy = self.cy[0] - self.half[0], self.cy[0] + self.half[0]
        x, y = self.points[:, 0], self.points[:, 1]
        if not (
            np.all(x >= hx[0]) and np.all(x <= hx[1])
            and np.all(y >= hy[0]) and np.all(y <= hy[1])
        ):
            raise ValueError("root box does not contain all points")

    def repulsion(self, theta: float) -> tuple[np.ndarray, float]:
        """Approximate repulsive numerators and Z; exact when theta = 0."""
        return _repulsion_arrays(
            self.points, self.cx, self.cy, self.half, self.child,
            self.count, self.sx, self.sy, self.head, self.next_pt,
            float(theta),
        )


def build_quadtree(points: np.ndarray) -> Quadtree:
    """Grow a quadtree over finite 2-D points (duplicates allowed)."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("expected an (N, 2) point array")
    if points.shape[0] == 0:
        raise ValueError("cannot build a tree over zero points")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")

    lo = points.min(axis=0)
    hi = points.max(axis=0)
    center = (lo + hi) / 2.0
    half = float(max(hi[0] - lo[0], hi[1] - lo[1])) / 2.0
    half = half * (1.0 + 1e-12) + 1e-12  # strictly containing square

    capacity = max(64, 8 * points.shape[0])
    while True:
        *arrays, n_nodes = _build_arrays(
            points, float(center[0]), float(center[1]), half, capacity
        )
        if n_nodes != -1:
            break
        capacity *= 4
    return Quadtree(points, *arrays, n_nodes=n_nodes)
