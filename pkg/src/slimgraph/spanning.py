"""Root selection, BFS distances, edge scoring, and the maximum spanning tree.

Edges are scored by weight times the log of the larger endpoint degree,
divided by the sum of the endpoints' unweighted BFS distances from a
maximum-degree root. A Kruskal pass over the scores (descending, edge id
breaking ties) yields the tree; everything else becomes the off-tree list,
kept in the same descending-score order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConnectivityError
from .graph import Graph

__all__ = [
    "SpanningTree",
    "select_root",
    "bfs_hop_distances",
    "effective_weights",
    "max_spanning_tree",
    "build_spanning_tree",
]


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: np.ndarray             # int64, -1 at the root
    parent_edge_weight: np.ndarray  # float64, 0.0 at the root
    tree_edge_ids: np.ndarray      # int64, ascending
    offtree_edge_ids: np.ndarray   # int64, descending score order

    @property
    def n_vertices(self) -> int:
        return int(self.parent.size)


def select_root(g: Graph) -> int:
    """Vertex of maximum degree; ties go to the smallest id."""
    return int(np.argmax(g.degrees))


def bfs_hop_distances(g: Graph, root: int) -> np.ndarray:
    """Unweighted hop count from root to every vertex (level-synchronous)."""
    dist = np.full(g.n_vertices, -1, dtype=np.int64)
    dist[root] = 0
    frontier = np.array([root], dtype=np.int64)
    level = 0
    indptr, neigh = g.adj_indptr, g.adj_neighbor
    while frontier.size:
        level += 1
        nbrs = neigh[_gather_ranges(indptr, frontier)]
        fresh = nbrs[dist[nbrs] < 0]
        if fresh.size == 0:
            break
        dist[fresh] = level
        frontier = np.unique(fresh)
    if np.any(dist < 0):
        raise ConnectivityError("BFS did not reach every vertex; graph is disconnected")
    return dist


def _gather_ranges(indptr: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Indices selecting the concatenated CSR slices of the given rows."""
    starts = indptr[rows]
    counts = indptr[rows + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    return offsets + np.arange(total, dtype=np.int64)


def effective_weights(g: Graph, root: int, dist: np.ndarray) -> np.ndarray:
    """Per-edge score: w * ln(max(deg u, deg v)) / (dist[u] + dist[v]).

    The natural log is cosmetic for tree selection: any base rescales every
    score by the same positive factor. The two-vertex graph would hit
    ln(1) = 0, so there the raw weight is used instead.
    """
    if g.n_vertices == 2:
        return g.ws.copy()
    maxdeg = np.maximum(g.degrees[g.us], g.degrees[g.vs])
    denom = (dist[g.us] + dist[g.vs]).astype(np.float64)
    return g.ws * np.log(maxdeg) / denom


def max_spanning_tree(g: Graph, scores: np.ndarray, root: int | None = None) -> SpanningTree:
    """Kruskal over descending scores; parents oriented toward the root.

    Tie-breaking is by ascending edge id everywhere, which makes the tree,
    the off-tree order, and everything downstream bit-reproducible.
    """
    n, m = g.n_vertices, g.n_edges
    if root is None:
        root = select_root(g)
    order = np.lexsort((np.arange(m, dtype=np.int64), -scores))
    uf = list(range(n))

    def find(x: int) -> int:
        while uf[x] != x:
            uf[x] = uf[uf[x]]  # path halving
            x = uf[x]
        return x

    in_tree = np.zeros(m, dtype=bool)
    us, vs = g.us.tolist(), g.vs.tolist()
    taken = 0
    for eid in order.tolist():
        ru, rv = find(us[eid]), find(vs[eid])
        if ru != rv:
            uf[ru] = rv
            in_tree[eid] = True
            taken += 1
            if taken == n - 1:
                break
    if taken != n - 1:
        raise ConnectivityError("graph is disconnected; no spanning tree exists")

    tree_ids = np.flatnonzero(in_tree)
    offtree_ids = order[~in_tree[order]]

    parent, parent_w = _orient(g, tree_ids, root)
    return SpanningTree(
        root=int(root),
        parent=parent,
        parent_edge_weight=parent_w,
        tree_edge_ids=tree_ids,
        offtree_edge_ids=offtree_ids,
    )


def _orient(g: Graph, tree_ids: np.ndarray, root: int) -> tuple[np.ndarray, np.ndarray]:
    n = g.n_vertices
    heads = [[] for _ in range(n)]
    t_us = g.us[tree_ids].tolist()
    t_vs = g.vs[tree_ids].tolist()
    t_ws = g.ws[tree_ids].tolist()
    for u, v, w in zip(t_us, t_vs, t_ws):
        heads[u].append((v, w))
        heads[v].append((u, w))
    parent = np.full(n, -1, dtype=np.int64)
    parent_w = np.zeros(n, dtype=np.float64)
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    stack = [root]
    while stack:
        x = stack.pop()
        for y, w in heads[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                parent_w[y] = w
                stack.append(y)
    return parent, parent_w


def build_spanning_tree(g: Graph) -> SpanningTree:
    """Convenience pipeline: root, BFS, scores, tree."""
    root = select_root(g)
    dist = bfs_hop_distances(g, root)
    scores = effective_weights(g, root, dist)
    return max_spanning_tree(g, scores, root)


def total_score(t: SpanningTree, scores: np.ndarray) -> float:
    return float(scores[t.tree_edge_ids].sum())


def log_rescaled_scores(scores: np.ndarray, base: float) -> np.ndarray:
    """Same scores expressed in another log base (for invariance checks)."""
    return scores / math.log(base)
