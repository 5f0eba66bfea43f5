"""Immutable weighted undirected graph in compressed adjacency form.

Vertex ids are dense 0-based integers. The edge list is canonical: u < v,
lexicographically sorted, deduplicated, all weights strictly positive.
Edge ids are positions in that canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import ConnectivityError, ValidationError

__all__ = [
    "Graph",
    "build_graph",
    "build_laplacian",
    "laplacian_invariant_errors",
    "connected_component_labels",
    "subgraph_from_edge_ids",
]


@dataclass(frozen=True)
class Graph:
    """Canonical edge list plus CSR adjacency. Treat all arrays as read-only."""

    n_vertices: int
    us: np.ndarray          # int64, canonical u < v
    vs: np.ndarray          # int64
    ws: np.ndarray          # float64, strictly positive
    adj_indptr: np.ndarray  # int64, length n_vertices + 1
    adj_neighbor: np.ndarray  # int64, length 2 * n_edges
    adj_edge_id: np.ndarray   # int64, length 2 * n_edges
    degrees: np.ndarray       # int64

    @property
    def n_edges(self) -> int:
        return int(self.us.size)

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj_neighbor[self.adj_indptr[v]:self.adj_indptr[v + 1]]

    def incident_edge_ids(self, v: int) -> np.ndarray:
        return self.adj_edge_id[self.adj_indptr[v]:self.adj_indptr[v + 1]]

    def edge_tuples(self) -> list[tuple[int, int, float]]:
        return [
            (int(u), int(v), float(w))
            for u, v, w in zip(self.us, self.vs, self.ws)
        ]


def build_graph(n_vertices: int, us, vs, ws) -> Graph:
    """Validate and canonicalize an edge list, then attach CSR adjacency.

    Raises ValidationError on self-loops, duplicate pairs, non-positive
    weights, or out-of-range vertex ids. Duplicate merging is the loader's
    job; this constructor insists on an already-deduplicated list.
    """
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    ws = np.asarray(ws, dtype=np.float64)
    if not (us.shape == vs.shape == ws.shape):
        raise ValidationError("edge arrays must have identical length")
    if n_vertices <= 0:
        raise ValidationError("graph must have at least one vertex")
    if us.size:
        if us.min() < 0 or vs.min() < 0 or max(us.max(), vs.max()) >= n_vertices:
            raise ValidationError("vertex id out of range [0, n_vertices)")
        if np.any(us == vs):
            raise ValidationError("self-loops are not allowed")
        if np.any(ws <= 0.0) or not np.all(np.isfinite(ws)):
            raise ValidationError("edge weights must be finite and strictly positive")

    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    order = np.lexsort((hi, lo))
    lo, hi, ws = lo[order], hi[order], ws[order]
    if lo.size > 1 and np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
        raise ValidationError("duplicate edges are not allowed")

    m = lo.size
    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    eids = np.concatenate([np.arange(m, dtype=np.int64)] * 2)
    degrees = np.bincount(rows, minlength=n_vertices).astype(np.int64)
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    # stable sort by row keeps the per-vertex neighbor lists in edge-id order
    perm = np.argsort(rows, kind="stable")
    return Graph(
        n_vertices=int(n_vertices),
        us=lo,
        vs=hi,
        ws=ws,
        adj_indptr=indptr,
        adj_neighbor=cols[perm],
        adj_edge_id=eids[perm],
        degrees=degrees,
    )


def build_laplacian(g: Graph) -> sp.csr_matrix:
    """Graph Laplacian: weighted degree on the diagonal, -w off-diagonal."""
    n, m = g.n_vertices, g.n_edges
    wdeg = np.bincount(g.us, weights=g.ws, minlength=n) + np.bincount(
        g.vs, weights=g.ws, minlength=n
    )
    rows = np.concatenate([g.us, g.vs, np.arange(n, dtype=np.int64)])
    cols = np.concatenate([g.vs, g.us, np.arange(n, dtype=np.int64)])
    data = np.concatenate([-g.ws, -g.ws, wdeg])
    lap = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    lap.sum_duplicates()
    return lap


def laplacian_invariant_errors(lap: sp.csr_matrix, rel: float = 1e-12) -> list[str]:
    """Check row sums, symmetry, and off-diagonal signs; return violations."""
    problems: list[str] = []
    scale = max(float(np.abs(lap.data).max()) if lap.nnz else 0.0, 1.0)
    row_sums = np.asarray(lap.sum(axis=1)).ravel()
    if np.any(np.abs(row_sums) > rel * scale):
        problems.append("row sums deviate from zero")
    if (lap != lap.T).nnz != 0:
        problems.append("matrix is not exactly symmetric")
    off = lap.tocoo()
    mask = off.row != off.col
    if np.any(off.data[mask] > 0.0):
        problems.append("positive off-diagonal entry")
    return problems


def connected_component_labels(g: Graph) -> np.ndarray:
    adj = sp.coo_matrix(
        (np.ones(2 * g.n_edges), (np.concatenate([g.us, g.vs]), np.concatenate([g.vs, g.us]))),
        shape=(g.n_vertices, g.n_vertices),
    ).tocsr()
    _, labels = csgraph.connected_components(adj, directed=False)
    return labels


def require_connected(g: Graph) -> None:
    labels = connected_component_labels(g)
    n_comp = int(labels.max()) + 1 if labels.size else 0
    if n_comp != 1:
        raise ConnectivityError(f"graph has {n_comp} connected components, expected 1")


def subgraph_from_edge_ids(g: Graph, edge_ids) -> Graph:
    """Subgraph over the same vertex set keeping only the given edges."""
    ids = np.sort(np.asarray(edge_ids, dtype=np.int64))
    return build_graph(g.n_vertices, g.us[ids], g.vs[ids], g.ws[ids])
