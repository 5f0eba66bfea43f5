"""Command-line front end: sparsify, evaluate, bench, and gen.

Stats rows share one fixed CSV schema:

    graph,n_vertices,n_edges,mode,alpha,threads,recovery_time_ms,passes,
    recovered_count,shortfall,pcg_iterations,converged

The timed region covers the off-tree recovery phase only (annotation, sort,
subtask partition, recovery); graph I/O, spanning-tree construction, and
tree indexing are excluded. Thread count comes from --threads, falling back
to the SLIMGRAPH_THREADS environment variable, then 1.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SlimgraphError, ValidationError
from .generators import gen_grid2d, gen_hub, gen_random_connected
from .graph import Graph, build_laplacian, subgraph_from_edge_ids
from .mmio import UniformWeights, load_matrix_market, peek_field, save_matrix_market
from .pcg import build_preconditioner, make_rhs, pcg_solve, relative_condition_number
from .recovery import (
    DEFAULT_CUTOFF_ABS,
    DEFAULT_CUTOFF_FRAC,
    DEFAULT_HOP_LIMIT,
    annotate_and_sort,
    partition_subtasks,
    recover_loose_multipass,
    recover_strict,
)
from .spanning import build_spanning_tree
from .treeindex import build_tree_index

__all__ = [
    "RunConfig",
    "StatsRecord",
    "CSV_HEADER",
    "THREADS_ENV_VAR",
    "cmd_sparsify",
    "cmd_evaluate",
    "cmd_bench",
    "cmd_gen",
    "main",
]

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "SLIMGRAPH_THREADS"

CSV_HEADER = [
    "graph",
    "n_vertices",
    "n_edges",
    "mode",
    "alpha",
    "threads",
    "recovery_time_ms",
    "passes",
    "recovered_count",
    "shortfall",
    "pcg_iterations",
    "converged",
]


@dataclass
class RunConfig:
    alpha: float = 0.02
    c: int = DEFAULT_HOP_LIMIT
    mode: str = "strict"
    threads: int = 1
    seed: int = 0
    sort_key: str = "rdist"
    cutoff_abs: int = DEFAULT_CUTOFF_ABS
    cutoff_frac: float = DEFAULT_CUTOFF_FRAC

    def validate(self) -> "RunConfig":
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.c < 1:
            raise ValidationError(f"c must be >= 1, got {self.c}")
        if self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}")
        if self.mode not in ("strict", "loose"):
            raise ValidationError(f"mode must be strict or loose, got {self.mode!r}")
        if self.sort_key not in ("rdist", "stretch"):
            raise ValidationError(f"sort_key must be rdist or stretch, got {self.sort_key!r}")
        return self


@dataclass
class StatsRecord:
    graph: str
    n_vertices: int
    n_edges: int
    mode: str | None = None
    alpha: float | None = None
    threads: int | None = None
    recovery_time_ms: float | None = None
    passes: int | None = None
    recovered_count: int | None = None
    shortfall: int | None = None
    pcg_iterations: int | None = None
    converged: bool | None = None

    def csv_row(self) -> list:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return str(x).lower()
            if isinstance(x, float):
                return f"{x:.6g}"
            return str(x)

        return [fmt(getattr(self, name)) for name in CSV_HEADER]

    def line(self) -> str:
        return " ".join(f"{k}={v}" for k, v in zip(CSV_HEADER, self.csv_row()) if v != "")


def resolve_threads(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV_VAR, env)
    return 1


def _weight_policy_for(path, seed: int):
    """Pattern files get uniform [1, 10] weights; weighted files keep theirs."""
    if peek_field(path) == "pattern":
        return UniformWeights(seed)
    return "keep"


def _budget(alpha: float, n_vertices: int) -> int:
    return math.floor(alpha * n_vertices)


def run_recovery_phase(g: Graph, tree, idx, config: RunConfig):
    """The timed region: annotate + sort (+ partition) + recover."""
    start = time.perf_counter()
    edges = annotate_and_sort(tree.offtree_edge_ids, g, idx, config.sort_key)
    budget = _budget(config.alpha, g.n_vertices)
    if config.mode == "strict":
        partition = partition_subtasks(edges, config.cutoff_abs, config.cutoff_frac)
        result = recover_strict(partition, edges, idx, budget, config.c, config.threads)
    else:
        result = recover_loose_multipass(edges, idx, budget, config.c)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return result, elapsed_ms


def _append_csv(path, records) -> None:
    path = Path(path)
    fresh = not path.exists()
    with path.open("a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.csv_row())


def cmd_sparsify(
    input_path,
    output_path,
    config: RunConfig,
    largest_component: bool = False,
    csv_path=None,
) -> tuple[int, StatsRecord]:
    config.validate()
    logger.info("effective config: %s", config)
    g = load_matrix_market(
        input_path,
        _weight_policy_for(input_path, config.seed),
        largest_component=largest_component,
    )
    tree = build_spanning_tree(g)
    idx = build_tree_index(tree)
    result, elapsed_ms = run_recovery_phase(g, tree, idx, config)
    kept = np.concatenate([tree.tree_edge_ids, result.recovered])
    sparsifier = subgraph_from_edge_ids(g, kept)
    save_matrix_market(output_path, sparsifier)
    if result.shortfall > 0:
        logger.warning(
            "recovered %d of the requested %d edges (shortfall %d)",
            result.recovered.size,
            _budget(config.alpha, g.n_vertices),
            result.shortfall,
        )
    record = StatsRecord(
        graph=Path(input_path).name,
        n_vertices=g.n_vertices,
        n_edges=g.n_edges,
        mode=config.mode,
        alpha=config.alpha,
        threads=config.threads,
        recovery_time_ms=elapsed_ms,
        passes=result.passes,
        recovered_count=int(result.recovered.size),
        shortfall=result.shortfall,
    )
    print(record.line())
    if csv_path:
        _append_csv(csv_path, [record])
    return 0, record


def cmd_evaluate(
    graph_path,
    sparsifier_path,
    tol: float = 1e-3,
    rhs_seed: int = 1,
    kappa: bool = False,
    seed: int = 0,
    largest_component: bool = False,
    csv_path=None,
) -> tuple[int, StatsRecord]:
    g = load_matrix_market(
        graph_path, _weight_policy_for(graph_path, seed), largest_component=largest_component
    )
    p = load_matrix_market(sparsifier_path)
    if g.n_vertices != p.n_vertices:
        raise ValidationError(
            f"vertex count mismatch: graph has {g.n_vertices}, sparsifier {p.n_vertices}"
        )
    lap_g = build_laplacian(g)
    lap_p = build_laplacian(p)
    ground = int(np.argmax(g.degrees))
    precond = build_preconditioner(lap_p, ground)
    b = make_rhs(g.n_vertices, rhs_seed)
    _, report = pcg_solve(lap_g, b, precond, tol=tol)
    record = StatsRecord(
        graph=Path(graph_path).name,
        n_vertices=g.n_vertices,
        n_edges=g.n_edges,
        pcg_iterations=report.iterations,
        converged=report.converged,
    )
    logger.info(
        "pcg: %d iterations, converged=%s, final relative residual %.3e",
        report.iterations,
        report.converged,
        report.final_relative_residual,
    )
    if kappa:
        value = relative_condition_number(lap_g, lap_p)
        logger.info("relative condition number: %.6g", value)
    print(record.line())
    if csv_path:
        _append_csv(csv_path, [record])
    return 0, record


def cmd_bench(
    suite_dir,
    config: RunConfig,
    alphas=(0.02, 0.05, 0.10),
    thread_list=(1,),
    modes=("strict", "loose"),
    csv_out="bench.csv",
    trials: int = 5,
    rhs_seed: int = 1,
) -> tuple[int, list]:
    """Minimum-of-trials recovery timing plus PCG quality, one row per cell.

    All modes and alphas of one graph share the same spanning tree, so the
    comparison isolates the recovery strategies.
    """
    config.validate()
    logger.info("effective config: %s", config)
    suite = sorted(Path(suite_dir).glob("*.mtx"))
    records: list[StatsRecord] = []
    for path in suite:
        try:
            g = load_matrix_market(path, _weight_policy_for(path, config.seed))
            tree = build_spanning_tree(g)
            idx = build_tree_index(tree)
            lap_g = build_laplacian(g)
            b = make_rhs(g.n_vertices, rhs_seed)
            for alpha in alphas:
                for mode in modes:
                    quality: dict = {}
                    for threads in thread_list:
                        cell = RunConfig(
                            alpha=alpha,
                            c=config.c,
                            mode=mode,
                            threads=threads,
                            seed=config.seed,
                            sort_key=config.sort_key,
                            cutoff_abs=config.cutoff_abs,
                            cutoff_frac=config.cutoff_frac,
                        )
                        best_ms = math.inf
                        result = None
                        for _ in range(trials):
                            result, elapsed_ms = run_recovery_phase(g, tree, idx, cell)
                            best_ms = min(best_ms, elapsed_ms)
                        if not quality:
                            kept = np.concatenate([tree.tree_edge_ids, result.recovered])
                            sparsifier = subgraph_from_edge_ids(g, kept)
                            precond = build_preconditioner(
                                build_laplacian(sparsifier), tree.root
                            )
                            _, report = pcg_solve(lap_g, b, precond)
                            quality = {
                                "pcg_iterations": report.iterations,
                                "converged": report.converged,
                            }
                        records.append(
                            StatsRecord(
                                graph=path.name,
                                n_vertices=g.n_vertices,
                                n_edges=g.n_edges,
                                mode=mode,
                                alpha=alpha,
                                threads=threads,
                                recovery_time_ms=best_ms,
                                passes=result.passes,
                                recovered_count=int(result.recovered.size),
                                shortfall=result.shortfall,
                                **quality,
                            )
                        )
        except (SlimgraphError, OSError) as exc:
            logger.error("skipping %s: %s", path.name, exc)
    out = Path(csv_out)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.csv_row())
    logger.info("wrote %d rows to %s", len(records), out)
    return 0, records


def cmd_gen(kind: str, params: list, seed: int, output, ring: bool = True) -> int:
    if kind == "grid2d":
        if len(params) != 2:
            raise ValidationError("grid2d takes ROWS COLS")
        g = gen_grid2d(params[0], params[1], weight_seed=seed)
    elif kind == "hub":
        if len(params) != 1:
            raise ValidationError("hub takes SPOKES")
        g = gen_hub(params[0], ring=ring, weight_seed=seed)
    elif kind == "random_connected":
        if len(params) != 2:
            raise ValidationError("random_connected takes N M")
        g = gen_random_connected(params[0], params[1], seed=seed, weight_seed=seed)
    else:
        raise ValidationError(f"unknown generator kind {kind!r}")
    save_matrix_market(output, g)
    logger.info("wrote %s: %d vertices, %d edges", output, g.n_vertices, g.n_edges)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.02, help="recovered edge ratio (default 0.02)")
    parser.add_argument("--c", type=int, default=DEFAULT_HOP_LIMIT, help="neighborhood hop limit (default 8)")
    parser.add_argument("--mode", choices=("strict", "loose"), default="strict")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker count (default: ${THREADS_ENV_VAR} or 1)")
    parser.add_argument("--seed", type=int, default=0, help="seed for generated weights")
    parser.add_argument("--sort-key", choices=("rdist", "stretch"), default="rdist")
    parser.add_argument("--cutoff-abs", type=int, default=DEFAULT_CUTOFF_ABS)
    parser.add_argument("--cutoff-frac", type=float, default=DEFAULT_CUTOFF_FRAC)
    parser.add_argument("--csv", default=None, help="append stats rows to this CSV file")


def _config_from(args) -> RunConfig:
    return RunConfig(
        alpha=args.alpha,
        c=args.c,
        mode=args.mode,
        threads=resolve_threads(args.threads),
        seed=args.seed,
        sort_key=args.sort_key,
        cutoff_abs=args.cutoff_abs,
        cutoff_frac=args.cutoff_frac,
    ).validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slimgraph",
        description="Spectral graph sparsification via spanning trees and "
        "similarity-pruned off-tree edge recovery.",
        epilog="CSV schema: " + ",".join(CSV_HEADER),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sparsify = sub.add_parser("sparsify", help="write a sparsifier for a graph")
    p_sparsify.add_argument("input")
    p_sparsify.add_argument("output")
    _add_common(p_sparsify)
    p_sparsify.add_argument("--largest-component", action="store_true",
                            help="extract the largest component instead of failing")

    p_eval = sub.add_parser("evaluate", help="PCG iteration count with a sparsifier preconditioner")
    p_eval.add_argument("graph")
    p_eval.add_argument("sparsifier")
    p_eval.add_argument("--tol", type=float, default=1e-3)
    p_eval.add_argument("--rhs-seed", type=int, default=1)
    p_eval.add_argument("--kappa", action="store_true",
                        help="also report the relative condition number (n <= 2000)")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--largest-component", action="store_true")
    p_eval.add_argument("--csv", default=None)

    p_bench = sub.add_parser("bench", help="timing/quality sweep over a directory of .mtx files")
    p_bench.add_argument("suite_dir")
    _add_common(p_bench)
    p_bench.add_argument("--alphas", default="0.02,0.05,0.10",
                         help="comma-separated recovery ratios")
    p_bench.add_argument("--thread-list", default="1", help="comma-separated worker counts")
    p_bench.add_argument("--modes", default="strict,loose")
    p_bench.add_argument("--trials", type=int, default=5)
    p_bench.add_argument("--rhs-seed", type=int, default=1)

    p_gen = sub.add_parser("gen", help="write a synthetic test graph")
    p_gen.add_argument("kind", choices=("grid2d", "hub", "random_connected"))
    p_gen.add_argument("params", type=int, nargs="+")
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--no-ring", action="store_true", help="hub only: omit the spoke ring")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sparsify":
            status, _ = cmd_sparsify(
                args.input,
                args.output,
                _config_from(args),
                largest_component=args.largest_component,
                csv_path=args.csv,
            )
            return status
        if args.command == "evaluate":
            status, _ = cmd_evaluate(
                args.graph,
                args.sparsifier,
                tol=args.tol,
                rhs_seed=args.rhs_seed,
                kappa=args.kappa,
                seed=args.seed,
                largest_component=args.largest_component,
                csv_path=args.csv,
            )
            return status
        if args.command == "bench":
            status, _ = cmd_bench(
                args.suite_dir,
                _config_from(args),
                alphas=tuple(float(a) for a in args.alphas.split(",") if a),
                thread_list=tuple(int(t) for t in args.thread_list.split(",") if t),
                modes=tuple(m for m in args.modes.split(",") if m),
                csv_out=args.csv or "bench.csv",
                trials=args.trials,
                rhs_seed=args.rhs_seed,
            )
            return status
        if args.command == "gen":
            return cmd_gen(
                args.kind, args.params, args.seed, args.output, ring=not args.no_ring
            )
        raise AssertionError(f"unhandled command {args.command}")
    except (SlimgraphError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
