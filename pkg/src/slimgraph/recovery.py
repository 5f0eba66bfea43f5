"""Off-tree edge recovery: criticality ranking, LCA subtasks, similarity marking.

Recovery walks off-tree edges in descending resistance-distance order. A
recovered edge marks later edges that sit in a "similar position" on the
spanning tree; marked edges are skipped. Two similarity conditions exist:

- strict: both candidate endpoints must fall in opposite hop-limited
  neighborhoods of the recovered edge, with the hop budget clamped by the
  endpoint-to-LCA depths. Strictly similar edges provably share their LCA,
  so edges partition into LCA subtasks with no cross-subtask marking, and a
  single pass suffices.
- loose: either candidate endpoint inside the union of two fixed-radius
  neighborhoods (a vertex-cover reading). This is the multi-pass baseline;
  it restarts on the leftover edges, with marks cleared, until the budget
  is met.

Parallel execution never changes results: the contract everywhere is
bit-equality with the serial schedule.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import multiprocessing
import numpy as np

from .graph import Graph
from .treeindex import (
    TreeIndex,
    lca_batch,
    resistance_distance_batch,
    stamp_neighborhood,
)

__all__ = [
    "DEFAULT_HOP_LIMIT",
    "DEFAULT_CUTOFF_ABS",
    "DEFAULT_CUTOFF_FRAC",
    "OffTreeEdge",
    "OffTreeEdgeList",
    "SubtaskPartition",
    "RecoveryResult",
    "annotate_and_sort",
    "partition_subtasks",
    "strict_similar",
    "loose_similar",
    "recover_subtask_serial",
    "recover_subtask_blocked",
    "recover_strict",
    "recover_loose_multipass",
]

logger = logging.getLogger(__name__)

DEFAULT_HOP_LIMIT = 8
DEFAULT_CUTOFF_ABS = 100_000
DEFAULT_CUTOFF_FRAC = 0.10

# Work thresholds below which process-pool dispatch costs more than it saves
# (fork startup is ~0.2s and a block round-trip ~1ms on commodity hardware;
# a capped subtask evaluation is far cheaper than that at desk scale).
# Results never depend on these: every schedule is sequentially equivalent.
_INNER_POOL_MIN_EDGES = 500_000   # single-subtask size before blocks ship out
_OUTER_POOL_MIN_EDGES = 100_000   # total small-subtask edges before fanning out


@dataclass(frozen=True)
class OffTreeEdge:
    """One off-tree edge with its tree annotations."""

    edge_id: int
    u: int
    v: int
    w: float
    lca: int
    r_dist: float
    rank: int


class OffTreeEdgeList:
    """Rank-ordered off-tree edges as parallel arrays (rank == position)."""

    __slots__ = ("edge_ids", "us", "vs", "ws", "lcas", "r_dists")

    def __init__(self, edge_ids, us, vs, ws, lcas, r_dists):
        self.edge_ids = edge_ids
        self.us = us
        self.vs = vs
        self.ws = ws
        self.lcas = lcas
        self.r_dists = r_dists

    def __len__(self) -> int:
        return int(self.edge_ids.size)

    def __getitem__(self, rank: int) -> OffTreeEdge:
        return OffTreeEdge(
            edge_id=int(self.edge_ids[rank]),
            u=int(self.us[rank]),
            v=int(self.vs[rank]),
            w=float(self.ws[rank]),
            lca=int(self.lcas[rank]),
            r_dist=float(self.r_dists[rank]),
            rank=int(rank),
        )

    def __iter__(self):
        for rank in range(len(self)):
            yield self[rank]


@dataclass(frozen=True)
class SubtaskPartition:
    """Off-tree edge ranks grouped by shared LCA, largest group first."""

    subtasks: list          # list[np.ndarray] of ranks, each ascending
    lcas: np.ndarray        # per-subtask LCA vertex
    large_cutoff: int       # groups at least this big use blocked processing
    n_offtree: int

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.subtasks], dtype=np.int64)

    def is_large(self, i: int) -> bool:
        return self.subtasks[i].size >= self.large_cutoff


@dataclass(frozen=True)
class RecoveryResult:
    recovered: np.ndarray    # edge ids, at most budget of them
    marked_counts: list      # per subtask (strict) or empty (loose)
    passes: int              # always 1 in strict mode
    shortfall: int           # budget minus recovered count, when positive


class _Scratch:
    """Reusable stamp arrays so neighborhood BFS never allocates per edge."""

    __slots__ = ("su", "sv", "t")

    def __init__(self, n: int):
        self.su = np.zeros(n, dtype=np.int64)
        self.sv = np.zeros(n, dtype=np.int64)
        self.t = 0

    def next_stamp(self) -> int:
        self.t += 1
        return self.t


def annotate_and_sort(
    offtree_edge_ids, g: Graph, idx: TreeIndex, sort_key: str = "rdist"
) -> OffTreeEdgeList:
    """Annotate off-tree edges with LCA and resistance distance, sort them.

    Sort is by the chosen key descending; equal keys keep ascending edge id
    (a stable, reproducible order). sort_key "stretch" ranks by w * R_T
    instead of plain R_T.
    """
    ids = np.asarray(offtree_edge_ids, dtype=np.int64)
    us, vs, ws = g.us[ids], g.vs[ids], g.ws[ids]
    lcas = lca_batch(idx, us, vs)
    r_dists = resistance_distance_batch(idx, us, vs, lcas)
    if sort_key == "rdist":
        key = r_dists
    elif sort_key == "stretch":
        key = ws * r_dists
    else:
        raise ValueError(f"unknown sort_key {sort_key!r}")
    order = np.lexsort((ids, -key))
    return OffTreeEdgeList(
        edge_ids=ids[order],
        us=us[order],
        vs=vs[order],
        ws=ws[order],
        lcas=lcas[order],
        r_dists=r_dists[order],
    )


def partition_subtasks(
    edges: OffTreeEdgeList,
    cutoff_abs: int = DEFAULT_CUTOFF_ABS,
    cutoff_frac: float = DEFAULT_CUTOFF_FRAC,
) -> SubtaskPartition:
    """Group ranks by LCA; order groups by size descending (ties: LCA id)."""
    n_off = len(edges)
    large_cutoff = min(int(cutoff_abs), int(math.ceil(cutoff_frac * n_off)))
    if n_off == 0:
        return SubtaskPartition(
            subtasks=[], lcas=np.empty(0, dtype=np.int64),
            large_cutoff=large_cutoff, n_offtree=0,
        )
    by_lca = np.argsort(edges.lcas, kind="stable")  # ranks stay ascending per group
    sorted_lcas = edges.lcas[by_lca]
    starts = np.flatnonzero(np.concatenate(([True], sorted_lcas[1:] != sorted_lcas[:-1])))
    ends = np.concatenate((starts[1:], [n_off]))
    group_lcas = sorted_lcas[starts]
    sizes = ends - starts
    group_order = np.lexsort((group_lcas, -sizes))
    subtasks = [np.sort(by_lca[starts[i]:ends[i]]) for i in group_order.tolist()]
    return SubtaskPartition(
        subtasks=subtasks,
        lcas=group_lcas[group_order],
        large_cutoff=large_cutoff,
        n_offtree=n_off,
    )


def strict_similar(recovered: OffTreeEdge, su, sv, candidate: OffTreeEdge) -> bool:
    """Both candidate endpoints inside opposite neighborhoods of the edge.

    su and sv are the hop-limited tree neighborhoods of recovered.u and
    recovered.v (radius beta_star for that edge).
    """
    su = set(int(x) for x in su)
    sv = set(int(x) for x in sv)
    return (candidate.u in su and candidate.v in sv) or (
        candidate.u in sv and candidate.v in su
    )


def loose_similar(recovered: OffTreeEdge, cover, candidate: OffTreeEdge) -> bool:
    """Either candidate endpoint inside the recovered edge's covered set."""
    cover = set(int(x) for x in cover)
    return candidate.u in cover or candidate.v in cover


class _SubtaskEval:
    """Per-subtask similarity evaluator.

    Candidate edges are reached through an index from u-endpoint to subtask
    positions, so a recovered edge only probes edges incident to its two
    neighborhoods instead of scanning the whole rank suffix. Results are
    evaluated against all later positions regardless of current marks;
    applying them is idempotent, which is what makes tentative block
    evaluation safe.
    """

    __slots__ = ("idx", "scratch", "us", "vs", "betas", "pos_by_u")

    def __init__(self, sub: np.ndarray, edges: OffTreeEdgeList, idx: TreeIndex,
                 c: int, scratch: _Scratch):
        self.idx = idx
        self.scratch = scratch
        self.us = edges.us[sub].tolist()
        self.vs = edges.vs[sub].tolist()
        lcas = edges.lcas[sub]
        d = idx.depth
        self.betas = np.minimum(
            np.minimum(d[edges.us[sub]] - d[lcas], d[edges.vs[sub]] - d[lcas]), c
        ).tolist()
        pos_by_u: dict[int, list[int]] = {}
        for q, x in enumerate(self.us):
            pos_by_u.setdefault(x, []).append(q)
        self.pos_by_u = pos_by_u

    def similar_after(self, p: int) -> np.ndarray:
        """Positions after p whose edge is strictly similar to the edge at p."""
        scratch = self.scratch
        t = scratch.next_stamp()
        beta = self.betas[p]
        ball_u = stamp_neighborhood(self.idx, self.us[p], beta, scratch.su, t)
        ball_v = stamp_neighborhood(self.idx, self.vs[p], beta, scratch.sv, t)
        su, sv = scratch.su, scratch.sv
        vs, by_u = self.vs, self.pos_by_u
        hits: list[int] = []
        for x in ball_u:  # candidates with u' in ball(u): need v' in ball(v)
            for q in by_u.get(x, ()):
                if q > p and sv[vs[q]] == t:
                    hits.append(q)
        for x in ball_v:  # candidates with u' in ball(v): need v' in ball(u)
            for q in by_u.get(x, ()):
                if q > p and su[vs[q]] == t:
                    hits.append(q)
        return np.unique(np.asarray(hits, dtype=np.int64))


def recover_subtask_serial(
    sub: np.ndarray,
    edges: OffTreeEdgeList,
    idx: TreeIndex,
    c: int,
    marks: np.ndarray,
    scratch: _Scratch | None = None,
    cap: int | None = None,
) -> list:
    """Reference serial schedule: recover in rank order, mark similar tails.

    Returns recovered ranks in rank order and sets marks for skipped edges.
    cap stops the subtask after that many survivors; a subtask never
    contributes more than the global budget to the final result, so the
    orchestrator passes the budget here without changing any output.
    """
    sub = np.asarray(sub, dtype=np.int64)
    if cap is None:
        cap = sub.size
    if cap <= 0:
        return []
    if sub.size == 1:
        r = int(sub[0])
        return [] if marks[r] else [r]
    if scratch is None:
        scratch = _Scratch(idx.n_vertices)
    ev = _SubtaskEval(sub, edges, idx, c, scratch)
    local_marked = marks[sub].copy()
    survivors: list[int] = []
    for p in range(sub.size):
        if local_marked[p]:
            continue
        survivors.append(int(sub[p]))
        if len(survivors) == cap:
            break
        local_marked[ev.similar_after(p)] = True
    marks[sub[local_marked]] = True
    return survivors


def recover_subtask_blocked(
    sub: np.ndarray,
    edges: OffTreeEdgeList,
    idx: TreeIndex,
    c: int,
    marks: np.ndarray,
    block_size: int,
    scratch: _Scratch | None = None,
    pool: ProcessPoolExecutor | None = None,
    sub_index: int | None = None,
    cap: int | None = None,
) -> list:
    """Judge-before-parallel blocked schedule; bit-equal to the serial one.

    Serially collect the next up-to-block_size unmarked edges (the judge
    step), evaluate their neighborhoods and tentative marks (in parallel
    when a pool is given and the subtask is big enough to amortize
    dispatch), then confirm recoveries in rank order. Tentative marks from
    a block edge that an earlier confirmed edge already marked are
    discarded along with the edge.
    """
    sub = np.asarray(sub, dtype=np.int64)
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    if cap is None:
        cap = sub.size
    if cap <= 0:
        return []
    if scratch is None:
        scratch = _Scratch(idx.n_vertices)
    ev = _SubtaskEval(sub, edges, idx, c, scratch)
    local_marked = marks[sub].copy()
    survivors: list[int] = []
    pos = 0
    size = sub.size
    done = False
    while pos < size and not done:
        block: list[int] = []
        while pos < size and len(block) < block_size:
            if not local_marked[pos]:
                block.append(pos)
            pos += 1
        if not block:
            break
        if (
            pool is not None
            and sub_index is not None
            and len(block) > 1
            and size >= _INNER_POOL_MIN_EDGES
        ):
            futures = [
                pool.submit(_worker_eval_block, sub_index, chunk)
                for chunk in _chunks(block, len(block))
            ]
            results = [r for f in futures for r in f.result()]
        else:
            results = [ev.similar_after(p) for p in block]
        for p, hits in zip(block, results):
            if local_marked[p]:
                continue  # a false positive: an earlier confirmed edge marked it
            survivors.append(int(sub[p]))
            if len(survivors) == cap:
                done = True
                break
            local_marked[hits] = True
    marks[sub[local_marked]] = True
    return survivors


def _chunks(items: list, n_chunks: int) -> list:
    n_chunks = max(1, min(n_chunks, len(items)))
    return [items[i::n_chunks] for i in range(n_chunks)]


# Fork-inherited context for worker processes; set by recover_strict right
# before the pool starts, read by workers, cleared afterwards.
_CTX = None
_WORKER_MARKS = None
_WORKER_SCRATCH = None
_WORKER_SUBCACHE: dict = {}


def _worker_state():
    global _WORKER_MARKS, _WORKER_SCRATCH
    edges, partition, idx, c, cap = _CTX
    if _WORKER_MARKS is None:
        _WORKER_MARKS = np.zeros(len(edges), dtype=bool)
        _WORKER_SCRATCH = _Scratch(idx.n_vertices)
    return edges, partition, idx, c, cap, _WORKER_MARKS, _WORKER_SCRATCH


def _worker_recover_small(sub_indices: list) -> list:
    """Run the serial schedule for a batch of small subtasks.

    Returns (survivor ranks, marked ranks) per subtask so the parent can
    reproduce the shared mark state without shipping whole arrays.
    """
    edges, partition, idx, c, cap, marks, scratch = _worker_state()
    out = []
    for i in sub_indices:
        sub = partition.subtasks[i]
        survivors = recover_subtask_serial(sub, edges, idx, c, marks, scratch, cap)
        out.append((survivors, sub[marks[sub]]))
    return out


def _worker_eval_block(sub_index: int, positions: list) -> list:
    """Evaluate tentative marks for block positions of one large subtask."""
    edges, partition, idx, c, _, _, scratch = _worker_state()
    ev = _WORKER_SUBCACHE.get(sub_index)
    if ev is None:
        ev = _SubtaskEval(partition.subtasks[sub_index], edges, idx, c, scratch)
        _WORKER_SUBCACHE[sub_index] = ev
    return [ev.similar_after(p) for p in positions]


def _make_pool(threads: int):
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        logger.warning("fork start method unavailable; recovery runs serially")
        return None
    return ProcessPoolExecutor(max_workers=threads, mp_context=ctx)


def recover_strict(
    partition: SubtaskPartition,
    edges: OffTreeEdgeList,
    idx: TreeIndex,
    budget: int,
    c: int = DEFAULT_HOP_LIMIT,
    threads: int = 1,
) -> RecoveryResult:
    """Single-pass recovery over LCA-disjoint subtasks with a global budget.

    Large subtasks run one at a time under the blocked schedule (block size
    = worker count); the rest are independent serial work items spread over
    the workers. Survivors merge in global rank order and the first budget
    of them are kept, so the result is a pure function of the inputs no
    matter how many workers participate.
    """
    global _CTX
    if threads < 1:
        raise ValueError("threads must be >= 1")
    n_off = len(edges)
    budget = _clamp_budget(budget, n_off)
    marks = np.zeros(n_off, dtype=bool)
    k = len(partition.subtasks)
    survivors_per_sub: list = [None] * k
    large = [i for i in range(k) if partition.is_large(i)]
    small = [i for i in range(k) if not partition.is_large(i)]

    small_edge_total = int(sum(partition.subtasks[i].size for i in small))
    worth_pooling = small_edge_total >= _OUTER_POOL_MIN_EDGES or any(
        partition.subtasks[i].size >= _INNER_POOL_MIN_EDGES for i in large
    )
    pool = None
    if threads > 1 and n_off and worth_pooling:
        _CTX = (edges, partition, idx, c, budget)
        pool = _make_pool(threads)
    try:
        scratch = _Scratch(idx.n_vertices) if n_off else None
        for i in large:
            survivors_per_sub[i] = recover_subtask_blocked(
                partition.subtasks[i], edges, idx, c, marks,
                block_size=threads, scratch=scratch, pool=pool, sub_index=i,
                cap=budget,
            )
        if small:
            if pool is None:
                for i in small:
                    survivors_per_sub[i] = recover_subtask_serial(
                        partition.subtasks[i], edges, idx, c, marks, scratch, budget
                    )
            else:
                batches = _chunks(small, threads * 4)
                for batch, result in zip(batches, pool.map(_worker_recover_small, batches)):
                    for i, (survivors, marked) in zip(batch, result):
                        survivors_per_sub[i] = survivors
                        marks[marked] = True
    finally:
        if pool is not None:
            pool.shutdown()
        _CTX = None

    all_survivors = (
        np.sort(np.concatenate([np.asarray(s, dtype=np.int64) for s in survivors_per_sub]))
        if k
        else np.empty(0, dtype=np.int64)
    )
    kept = all_survivors[:budget]
    marked_counts = [int(marks[sub].sum()) for sub in partition.subtasks]
    return RecoveryResult(
        recovered=edges.edge_ids[kept],
        marked_counts=marked_counts,
        passes=1,
        shortfall=max(0, budget - int(all_survivors.size)),
    )


def recover_loose_multipass(
    edges: OffTreeEdgeList,
    idx: TreeIndex,
    budget: int,
    c: int = DEFAULT_HOP_LIMIT,
) -> RecoveryResult:
    """Multi-pass baseline: fixed-radius cover marking, restart on leftovers.

    Each pass walks the remaining edges in rank order, recovers any unmarked
    edge, and marks every later edge with an endpoint inside the recovered
    edge's cover. Marks clear between passes; passes repeat until the budget
    is met or nothing is left.
    """
    n_off = len(edges)
    budget = _clamp_budget(budget, n_off)
    recovered: list[int] = []
    remaining = np.arange(n_off, dtype=np.int64)
    cover = np.zeros(idx.n_vertices, dtype=np.int64)
    stamp = 0
    passes = 0
    while remaining.size and len(recovered) < budget:
        passes += 1
        r_us = edges.us[remaining]
        r_vs = edges.vs[remaining]
        marked = np.zeros(remaining.size, dtype=bool)
        for p in range(remaining.size):
            if marked[p]:
                continue
            recovered.append(int(remaining[p]))
            if len(recovered) == budget:
                break
            stamp += 1
            stamp_neighborhood(idx, int(r_us[p]), c, cover, stamp)
            stamp_neighborhood(idx, int(r_vs[p]), c, cover, stamp)
            tail_u = r_us[p + 1:]
            tail_v = r_vs[p + 1:]
            marked[p + 1:] |= (cover[tail_u] == stamp) | (cover[tail_v] == stamp)
        remaining = remaining[marked]
    ranks = np.asarray(recovered, dtype=np.int64)
    return RecoveryResult(
        recovered=edges.edge_ids[ranks],
        marked_counts=[],
        passes=passes,
        shortfall=max(0, budget - len(recovered)),
    )


def _clamp_budget(budget: int, n_off: int) -> int:
    # Truncation by slicing already caps the output; the warning is the
    # user-visible part and shortfall keeps reporting the requested budget.
    if budget > n_off:
        warnings.warn(
            f"budget {budget} exceeds {n_off} off-tree edges",
            stacklevel=3,
        )
    return max(0, int(budget))
