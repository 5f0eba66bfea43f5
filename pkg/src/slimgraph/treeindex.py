"""Rooted spanning-tree index: O(log n) LCA, depths, resistance prefix sums.

The ancestor table holds 2^k-th ancestors (sentinel -1), depth is the
unweighted hop count from the root, and res_to_root accumulates reciprocal
edge weights along the path to the root so any pairwise resistance distance
is two lookups and an LCA away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .spanning import SpanningTree

__all__ = [
    "TreeIndex",
    "build_tree_index",
    "lca",
    "lca_batch",
    "resistance_distance",
    "resistance_distance_batch",
    "beta_star",
    "beta_star_batch",
    "tree_neighborhood",
    "stamp_neighborhood",
]


@dataclass(frozen=True)
class TreeIndex:
    root: int
    depth: np.ndarray         # int64
    up: np.ndarray            # int64, shape (levels, n); up[0] = parent
    res_to_root: np.ndarray   # float64
    tree_adj: list            # list[list[int]]: parent + children per vertex

    @property
    def n_vertices(self) -> int:
        return int(self.depth.size)

    @property
    def levels(self) -> int:
        return int(self.up.shape[0])


def build_tree_index(t: SpanningTree) -> TreeIndex:
    """Index a spanning tree; O(n log n) table construction."""
    n = t.n_vertices
    parent = t.parent
    root = t.root

    children: list[list[int]] = [[] for _ in range(n)]
    for v, p in enumerate(parent.tolist()):
        if p >= 0:
            children[p].append(v)

    depth = np.full(n, -1, dtype=np.int64)
    res = np.zeros(n, dtype=np.float64)
    depth[root] = 0
    order = [root]
    head = 0
    pw = t.parent_edge_weight
    while head < len(order):
        x = order[head]
        head += 1
        dx = depth[x]
        rx = res[x]
        for c in children[x]:
            depth[c] = dx + 1
            res[c] = rx + 1.0 / pw[c]
            order.append(c)
    if head != n:
        raise StructureError(
            "parent pointers do not form a tree rooted at the root "
            f"(reached {head} of {n} vertices)"
        )

    levels = max(1, int(np.ceil(np.log2(max(2, n)))))
    up = np.full((levels, n), -1, dtype=np.int64)
    up[0] = parent
    for k in range(1, levels):
        prev = up[k - 1]
        has = prev >= 0
        up[k, has] = prev[prev[has]]

    tree_adj: list[list[int]] = [list(c) for c in children]
    for v, p in enumerate(parent.tolist()):
        if p >= 0:
            tree_adj[v].append(p)

    return TreeIndex(root=int(root), depth=depth, up=up, res_to_root=res, tree_adj=tree_adj)


def lca(idx: TreeIndex, u: int, v: int) -> int:
    """Lowest common ancestor via binary lifting."""
    depth, up = idx.depth, idx.up
    du, dv = int(depth[u]), int(depth[v])
    if du < dv:
        u, v, du, dv = v, u, dv, du
    diff = du - dv
    k = 0
    while diff:
        if diff & 1:
            u = int(up[k, u])
        diff >>= 1
        k += 1
    if u == v:
        return u
    for k in range(idx.levels - 1, -1, -1):
        au, av = int(up[k, u]), int(up[k, v])
        if au != av:
            u, v = au, av
    return int(up[0, u])


def lca_batch(idx: TreeIndex, us, vs) -> np.ndarray:
    """Vectorized LCA over parallel arrays of endpoints."""
    depth, up = idx.depth, idx.up
    u = np.asarray(us, dtype=np.int64).copy()
    v = np.asarray(vs, dtype=np.int64).copy()
    swap = depth[u] < depth[v]
    u[swap], v[swap] = v[swap], u[swap]
    diff = depth[u] - depth[v]
    for k in range(idx.levels):
        lift = (diff >> k) & 1 == 1
        if np.any(lift):
            u[lift] = up[k, u[lift]]
    out = np.where(u == v, u, -1)
    open_ = u != v
    for k in range(idx.levels - 1, -1, -1):
        if not np.any(open_):
            break
        au = up[k, u[open_]]
        av = up[k, v[open_]]
        move = au != av
        moved = np.flatnonzero(open_)[move]
        u[moved] = au[move]
        v[moved] = av[move]
    out[open_] = up[0, u[open_]]
    return out


def resistance_distance(idx: TreeIndex, u: int, v: int) -> float:
    """Sum of reciprocal weights along the unique tree path between u and v."""
    a = lca(idx, u, v)
    return float(idx.res_to_root[u] + idx.res_to_root[v] - 2.0 * idx.res_to_root[a])


def resistance_distance_batch(idx: TreeIndex, us, vs, lcas=None) -> np.ndarray:
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    if lcas is None:
        lcas = lca_batch(idx, us, vs)
    r = idx.res_to_root
    return r[us] + r[vs] - 2.0 * r[lcas]


def beta_star(idx: TreeIndex, u: int, v: int, c: int = 8) -> int:
    """Hop budget for neighborhoods: endpoint-to-LCA depths clamped by c."""
    a = lca(idx, u, v)
    da = int(idx.depth[a])
    return min(int(idx.depth[u]) - da, int(idx.depth[v]) - da, c)


def beta_star_batch(idx: TreeIndex, us, vs, lcas, c: int = 8) -> np.ndarray:
    d = idx.depth
    return np.minimum(np.minimum(d[us] - d[lcas], d[vs] - d[lcas]), c)


def tree_neighborhood(idx: TreeIndex, u: int, beta: int) -> np.ndarray:
    """Vertices within beta hops of u on the tree, ascending order.

    BFS runs over the spanning tree only, never the original graph.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    adj = idx.tree_adj
    visited = {int(u)}
    frontier = [int(u)]
    for _ in range(beta):
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in visited:
                    visited.add(y)
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    return np.array(sorted(visited), dtype=np.int64)


def stamp_neighborhood(idx: TreeIndex, u: int, beta: int, stamps: np.ndarray, stamp: int) -> list:
    """Mark the beta-hop tree neighborhood of u by writing stamp into stamps.

    Low-level primitive for recovery loops: a shared int array plus a
    monotonically increasing stamp value replaces per-call set allocation.
    Membership afterwards is stamps[x] == stamp; the visited vertices are
    also returned as a list.
    """
    adj = idx.tree_adj
    stamps[u] = stamp
    visited = [u]
    frontier = [u]
    for _ in range(beta):
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if stamps[y] != stamp:
                    stamps[y] = stamp
                    nxt.append(y)
        if not nxt:
            break
        visited.extend(nxt)
        frontier = nxt
    return visited
