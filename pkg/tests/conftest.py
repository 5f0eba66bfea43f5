"""Shared fixtures and independent oracles for the test suite.

The oracle implementations here deliberately avoid the library's fast paths:
LCA by parent-chain walking, resistance by dense pseudoinverse, neighborhoods
by dict-based BFS, and recovery by a literal restatement of the similarity
rule over sets. They are the ground truth the optimized code is checked
against.
"""

from __future__ import annotations

import numpy as np
import pytest

from slimgraph.graph import Graph, build_graph
from slimgraph.spanning import SpanningTree
from slimgraph.treeindex import TreeIndex, build_tree_index


# ---------------------------------------------------------------- fixtures


def make_tree_graph(n, tree_edges, offtree_edges, root=0):
    """Graph + SpanningTree + TreeIndex from explicit tree/off-tree lists.

    Bypasses max_spanning_tree so tests can pin the exact tree shape the
    similarity examples assume.
    """
    all_edges = list(tree_edges) + list(offtree_edges)
    us = [e[0] for e in all_edges]
    vs = [e[1] for e in all_edges]
    ws = [e[2] if len(e) > 2 else 1.0 for e in all_edges]
    g = build_graph(n, us, vs, ws)

    def _key(u, v):
        return (min(u, v), max(u, v))

    id_of = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(g.us, g.vs))}
    tree_ids = np.array(sorted(id_of[_key(e[0], e[1])] for e in tree_edges), dtype=np.int64)
    off_ids = np.array([id_of[_key(e[0], e[1])] for e in offtree_edges], dtype=np.int64)

    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in range(n)}
    for eid in tree_ids.tolist():
        u, v, w = int(g.us[eid]), int(g.vs[eid]), float(g.ws[eid])
        adj[u].append((v, w))
        adj[v].append((u, w))
    parent = np.full(n, -1, dtype=np.int64)
    parent_w = np.zeros(n)
    seen = {root}
    queue = [root]
    while queue:
        x = queue.pop()
        for y, w in adj[x]:
            if y not in seen:
                seen.add(y)
                parent[y] = x
                parent_w[y] = w
                queue.append(y)
    tree = SpanningTree(
        root=root,
        parent=parent,
        parent_edge_weight=parent_w,
        tree_edge_ids=tree_ids,
        offtree_edge_ids=off_ids,
    )
    return g, tree, build_tree_index(tree)


def random_parent_tree(rng: np.random.Generator, n: int):
    """Random recursive tree as (parents, weights); vertex 0 is the root."""
    parent = np.full(n, -1, dtype=np.int64)
    weight = np.zeros(n)
    for v in range(1, n):
        parent[v] = int(rng.integers(0, v))
        weight[v] = float(rng.uniform(1.0, 10.0))
    return parent, weight


def tree_from_parents(parent: np.ndarray, weight: np.ndarray):
    n = parent.size
    tree_edges = [
        (int(parent[v]), v, float(weight[v])) for v in range(n) if parent[v] >= 0
    ]
    return make_tree_graph(n, tree_edges, [], root=0)


@pytest.fixture
def chain_branch():
    """Two length-4 unit paths joined at the root, plus the two witness edges.

    Off-tree edge (4, 8) joins the chain ends; (1, 5) joins the first hop of
    each branch. Recovering (4, 8) first marks (1, 5); the other way around
    marks nothing.
    """
    tree = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (5, 6), (6, 7), (7, 8)]
    off = [(4, 8), (1, 5)]
    return make_tree_graph(9, tree, off, root=0)


# ----------------------------------------------------------------- oracles


def naive_lca(parent, u, v) -> int:
    anc = {int(u)}
    x = int(u)
    while parent[x] >= 0:
        x = int(parent[x])
        anc.add(x)
    y = int(v)
    while y not in anc:
        y = int(parent[y])
    return y


def naive_tree_ball(idx: TreeIndex, u: int, beta: int) -> set:
    """BFS over the tree adjacency with plain sets."""
    ball = {int(u)}
    frontier = [int(u)]
    for _ in range(beta):
        nxt = []
        for x in frontier:
            for y in idx.tree_adj[x]:
                if y not in ball:
                    ball.add(y)
                    nxt.append(y)
        frontier = nxt
    return ball


def naive_resistance(parent, parent_w, u, v) -> float:
    a = naive_lca(parent, u, v)
    total = 0.0
    for start in (u, v):
        x = int(start)
        while x != a:
            total += 1.0 / float(parent_w[x])
            x = int(parent[x])
    return total


def dense_effective_resistance(lap_dense: np.ndarray) -> np.ndarray:
    """Pairwise effective resistances from the Laplacian pseudoinverse."""
    pinv = np.linalg.pinv(lap_dense)
    d = np.diag(pinv)
    return d[:, None] + d[None, :] - 2.0 * pinv


def naive_beta_star(parent, depth, u, v, c=8) -> int:
    a = naive_lca(parent, u, v)
    return min(int(depth[u]) - int(depth[a]), int(depth[v]) - int(depth[a]), c)


def naive_strict_similar(idx: TreeIndex, parent, depth, e, f, c=8) -> bool:
    """Literal restatement of the strict rule for a recovered e and candidate f."""
    beta = naive_beta_star(parent, depth, e[0], e[1], c)
    su = naive_tree_ball(idx, e[0], beta)
    sv = naive_tree_ball(idx, e[1], beta)
    return (f[0] in su and f[1] in sv) or (f[0] in sv and f[1] in su)


def naive_recover_subtask(idx: TreeIndex, parent, depth, pairs, c=8):
    """Brute-force recovery over a rank-ordered list of (u, v) pairs."""
    marked = [False] * len(pairs)
    survivors = []
    for i, e in enumerate(pairs):
        if marked[i]:
            continue
        survivors.append(i)
        for j in range(i + 1, len(pairs)):
            if not marked[j] and naive_strict_similar(idx, parent, depth, e, pairs[j], c):
                marked[j] = True
    return survivors, marked


def spanning_tree_edge_sets(g: Graph):
    """Every spanning tree of a small graph, as frozensets of edge ids."""
    from itertools import combinations

    n, m = g.n_vertices, g.n_edges
    out = []
    for combo in combinations(range(m), n - 1):
        uf = list(range(n))

        def find(x):
            while uf[x] != x:
                uf[x] = uf[uf[x]]
                x = uf[x]
            return x

        ok = True
        for eid in combo:
            ru, rv = find(int(g.us[eid])), find(int(g.vs[eid]))
            if ru == rv:
                ok = False
                break
            uf[ru] = rv
        if ok:
            out.append(frozenset(combo))
    return out
