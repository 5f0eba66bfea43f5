"""Spectral graph sparsification via spanning trees and off-tree edge recovery.

Pipeline: load or generate a graph, build the effective-weight maximum
spanning tree, index it for LCA/resistance queries, recover spectrally
critical off-tree edges under the strict (single-pass, subtask-parallel) or
loose (multi-pass baseline) similarity condition, then judge the sparsifier
by PCG iteration counts with its Laplacian as the preconditioner.
"""

from .errors import (
    CapabilityError,
    ConnectivityError,
    FactorizationError,
    FormatError,
    SlimgraphError,
    StructureError,
    ValidationError,
)
from .generators import gen_grid2d, gen_hub, gen_random_connected, generate
from .graph import (
    Graph,
    build_graph,
    build_laplacian,
    laplacian_invariant_errors,
    subgraph_from_edge_ids,
)
from .mmio import UniformWeights, load_matrix_market, save_matrix_market
from .pcg import (
    Preconditioner,
    SolveReport,
    build_preconditioner,
    generalized_eigenvalues,
    make_rhs,
    pcg_solve,
    relative_condition_number,
)
from .recovery import (
    OffTreeEdge,
    OffTreeEdgeList,
    RecoveryResult,
    SubtaskPartition,
    annotate_and_sort,
    loose_similar,
    partition_subtasks,
    recover_loose_multipass,
    recover_strict,
    recover_subtask_blocked,
    recover_subtask_serial,
    strict_similar,
)
from .spanning import (
    SpanningTree,
    bfs_hop_distances,
    build_spanning_tree,
    effective_weights,
    max_spanning_tree,
    select_root,
)
from .treeindex import (
    TreeIndex,
    beta_star,
    build_tree_index,
    lca,
    lca_batch,
    resistance_distance,
    resistance_distance_batch,
    tree_neighborhood,
)

__version__ = "0.1.0"
