"""Matrix Market coordinate I/O for undirected weighted graphs.

Load policy, in order: 1-based ids shifted to 0-based, self-loops dropped,
explicit zeros dropped, entries canonicalized to u < v, duplicates merged by
summing weights. Pattern matrices carry no weights and therefore require the
uniform weight policy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConnectivityError, FormatError, ValidationError
from .graph import Graph, build_graph, connected_component_labels

__all__ = ["UniformWeights", "load_matrix_market", "save_matrix_market", "peek_field"]

logger = logging.getLogger(__name__)

_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric"}


@dataclass(frozen=True)
class UniformWeights:
    """Replace all edge weights with independent uniforms in [lo, hi]."""

    seed: int
    lo: float = 1.0
    hi: float = 10.0


def _parse_header(line: str) -> tuple[str, str]:
    tokens = line.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket":
        raise FormatError("expected '%%MatrixMarket matrix coordinate <field> <symmetry>'", 1)
    _, obj, fmt, field_, symmetry = tokens
    if obj != "matrix" or fmt != "coordinate":
        raise FormatError(f"unsupported object/format '{obj} {fmt}'", 1)
    if field_ not in _FIELDS:
        raise FormatError(f"unsupported field '{field_}'", 1)
    if symmetry not in _SYMMETRIES:
        raise FormatError(f"unsupported symmetry '{symmetry}'", 1)
    return field_, symmetry


def peek_field(path) -> str:
    """Header field of a Matrix Market file: real, integer, or pattern."""
    with Path(path).open("r", encoding="utf-8") as fh:
        return _parse_header(fh.readline())[0]


def load_matrix_market(
    path,
    weight_policy: str | UniformWeights = "keep",
    *,
    largest_component: bool = False,
) -> Graph:
    """Read a Matrix Market coordinate file as a canonical Graph.

    weight_policy is either "keep" or a UniformWeights instance. Disconnected
    input raises ConnectivityError unless largest_component=True, which keeps
    the biggest component and relabels its vertices densely.
    """
    path = Path(path)
    field_ = None
    n_rows = n_cols = n_declared = None
    src: list[int] = []
    dst: list[int] = []
    val: list[float] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if lineno == 1:
                field_, _ = _parse_header(line)
                continue
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if n_rows is None:
                if len(parts) != 3:
                    raise FormatError("size line must be 'rows cols nnz'", lineno)
                try:
                    n_rows, n_cols, n_declared = (int(p) for p in parts)
                except ValueError:
                    raise FormatError("size line must contain integers", lineno) from None
                if n_rows != n_cols:
                    raise FormatError(f"matrix must be square, got {n_rows}x{n_cols}", lineno)
                continue
            want = 2 if field_ == "pattern" else 3
            if len(parts) != want:
                raise FormatError(f"expected {want} entries per data line", lineno)
            try:
                i = int(parts[0])
                j = int(parts[1])
                w = 1.0 if field_ == "pattern" else float(parts[2])
            except ValueError:
                raise FormatError("could not parse coordinate entry", lineno) from None
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise FormatError(f"index ({i}, {j}) outside declared size", lineno)
            src.append(i - 1)
            dst.append(j - 1)
            val.append(w)
    if n_rows is None:
        raise FormatError("missing size line", 1)
    if len(src) != n_declared:
        logger.warning(
            "%s: declared %d entries, found %d", path.name, n_declared, len(src)
        )

    if field_ == "pattern" and not isinstance(weight_policy, UniformWeights):
        raise ValidationError("pattern matrices require the uniform weight policy")

    us = np.asarray(src, dtype=np.int64)
    vs = np.asarray(dst, dtype=np.int64)
    ws = np.asarray(val, dtype=np.float64)

    loops = us == vs
    n_loops = int(loops.sum())
    if n_loops:
        logger.info("%s: dropped %d self-loop entries", path.name, n_loops)
        us, vs, ws = us[~loops], vs[~loops], ws[~loops]

    if weight_policy == "keep":
        zeros = ws == 0.0
        if zeros.any():
            logger.info("%s: dropped %d explicit zeros", path.name, int(zeros.sum()))
            us, vs, ws = us[~zeros], vs[~zeros], ws[~zeros]
        if np.any(ws < 0.0):
            bad = int(np.argmax(ws < 0.0))
            raise ValidationError(
                f"negative weight on edge ({us[bad] + 1}, {vs[bad] + 1}) with keep policy"
            )
    elif not isinstance(weight_policy, UniformWeights):
        raise ValidationError(f"unknown weight policy {weight_policy!r}")

    # canonicalize and merge duplicates by summing
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    order = np.lexsort((hi, lo))
    lo, hi, ws = lo[order], hi[order], ws[order]
    if lo.size:
        boundary = np.ones(lo.size, dtype=bool)
        boundary[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
        starts = np.flatnonzero(boundary)
        merged = int(lo.size - starts.size)
        if merged:
            logger.info("%s: merged %d duplicate entries", path.name, merged)
        ws = np.add.reduceat(ws, starts)
        lo, hi = lo[starts], hi[starts]

    if isinstance(weight_policy, UniformWeights):
        rng = np.random.default_rng(weight_policy.seed)
        ws = rng.uniform(weight_policy.lo, weight_policy.hi, size=lo.size)

    g = build_graph(n_rows, lo, hi, ws)
    labels = connected_component_labels(g)
    n_comp = int(labels.max()) + 1 if labels.size else 0
    if n_comp != 1:
        if not largest_component:
            raise ConnectivityError(
                f"{path.name}: graph has {n_comp} components "
                "(pass largest_component=True to extract the biggest one)"
            )
        g = _largest_component(g, labels)
        logger.info(
            "%s: kept largest component with %d of %d vertices",
            path.name,
            g.n_vertices,
            n_rows,
        )
    return g


def _largest_component(g: Graph, labels: np.ndarray) -> Graph:
    counts = np.bincount(labels)
    keep = int(np.argmax(counts))  # ties resolved toward the smallest label
    vmask = labels == keep
    remap = -np.ones(g.n_vertices, dtype=np.int64)
    remap[vmask] = np.arange(int(vmask.sum()), dtype=np.int64)
    emask = vmask[g.us]
    return build_graph(int(vmask.sum()), remap[g.us[emask]], remap[g.vs[emask]], g.ws[emask])


def save_matrix_market(path, g: Graph) -> None:
    """Write the graph as symmetric coordinate real, lower triangle, 1-based."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        fh.write(f"{g.n_vertices} {g.n_vertices} {g.n_edges}\n")
        for u, v, w in zip(g.us, g.vs, g.ws):
            fh.write(f"{int(v) + 1} {int(u) + 1} {float(w)!r}\n")
