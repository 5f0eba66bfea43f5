"""Deterministic synthetic graphs for tests and desk-scale benchmarks.

Every generator assigns independent uniform weights in [1, 10] from
weight_seed, in canonical edge order, so a (kind, params, seeds) tuple fully
determines the graph.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .graph import Graph, build_graph

__all__ = ["gen_grid2d", "gen_hub", "gen_random_connected", "generate"]


def _with_uniform_weights(n: int, us, vs, weight_seed: int) -> Graph:
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    order = np.lexsort((hi, lo))
    rng = np.random.default_rng(weight_seed)
    ws = rng.uniform(1.0, 10.0, size=lo.size)
    return build_graph(n, lo[order], hi[order], ws)


def gen_grid2d(rows: int, cols: int, weight_seed: int = 0) -> Graph:
    """rows x cols lattice with 4-neighborhood edges."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValidationError("grid2d needs at least two vertices")
    ids = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    right_u = ids[:, :-1].ravel()
    right_v = ids[:, 1:].ravel()
    down_u = ids[:-1, :].ravel()
    down_v = ids[1:, :].ravel()
    us = np.concatenate([right_u, down_u])
    vs = np.concatenate([right_v, down_v])
    return _with_uniform_weights(rows * cols, us, vs, weight_seed)


def gen_hub(spokes: int, ring: bool = True, weight_seed: int = 0) -> Graph:
    """One center adjacent to every spoke, plus an optional ring among spokes.

    The hub's degree dwarfs every other degree, which makes this the
    desk-scale stand-in for skewed social-network style inputs.
    """
    if spokes < 1:
        raise ValidationError("hub needs at least one spoke")
    star_u = np.zeros(spokes, dtype=np.int64)
    star_v = np.arange(1, spokes + 1, dtype=np.int64)
    us, vs = [star_u], [star_v]
    if ring and spokes >= 2:
        ring_u = np.arange(1, spokes, dtype=np.int64)
        ring_v = ring_u + 1
        us.append(ring_u)
        vs.append(ring_v)
        if spokes >= 3:
            us.append(np.array([1], dtype=np.int64))
            vs.append(np.array([spokes], dtype=np.int64))
    return _with_uniform_weights(spokes + 1, np.concatenate(us), np.concatenate(vs), weight_seed)


def gen_random_connected(n: int, m: int, seed: int, weight_seed: int | None = None) -> Graph:
    """Random recursive tree plus m - (n-1) distinct random extra edges."""
    if n < 2:
        raise ValidationError("random_connected needs n >= 2")
    if m < n - 1:
        raise ValidationError(f"m={m} cannot connect {n} vertices (need >= {n - 1})")
    if m > n * (n - 1) // 2:
        raise ValidationError(f"m={m} exceeds the simple-graph maximum for n={n}")
    rng = np.random.default_rng(seed)
    parents = np.array(
        [rng.integers(0, v) for v in range(1, n)], dtype=np.int64
    )
    children = np.arange(1, n, dtype=np.int64)
    seen = set(zip(np.minimum(parents, children).tolist(), np.maximum(parents, children).tolist()))
    extra_u: list[int] = []
    extra_v: list[int] = []
    need = m - (n - 1)
    while len(extra_u) < need:
        batch = max(1024, 2 * (need - len(extra_u)))
        a = rng.integers(0, n, size=batch)
        b = rng.integers(0, n, size=batch)
        for x, y in zip(a.tolist(), b.tolist()):
            if x == y:
                continue
            key = (x, y) if x < y else (y, x)
            if key in seen:
                continue
            seen.add(key)
            extra_u.append(key[0])
            extra_v.append(key[1])
            if len(extra_u) == need:
                break
    us = np.concatenate([np.minimum(parents, children), np.asarray(extra_u, dtype=np.int64)])
    vs = np.concatenate([np.maximum(parents, children), np.asarray(extra_v, dtype=np.int64)])
    return _with_uniform_weights(n, us, vs, weight_seed if weight_seed is not None else seed)


def generate(kind: str, params: dict, weight_seed: int = 0) -> Graph:
    """Dispatch by kind name; used by the command-line front end."""
    if kind == "grid2d":
        return gen_grid2d(params["rows"], params["cols"], weight_seed)
    if kind == "hub":
        return gen_hub(params["spokes"], params.get("ring", True), weight_seed)
    if kind == "random_connected":
        return gen_random_connected(
            params["n"], params["m"], params["seed"], params.get("weight_seed", weight_seed)
        )
    raise ValidationError(f"unknown generator kind {kind!r}")
