"""Tree index: binary-lifting LCA, resistance prefix sums, neighborhoods."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slimgraph import (
    StructureError,
    beta_star,
    build_laplacian,
    build_tree_index,
    lca,
    lca_batch,
    resistance_distance,
    resistance_distance_batch,
    tree_neighborhood,
)
from slimgraph.spanning import SpanningTree

from conftest import (
    dense_effective_resistance,
    make_tree_graph,
    naive_lca,
    naive_resistance,
    naive_tree_ball,
    random_parent_tree,
    tree_from_parents,
)


def weighted_path3():
    return make_tree_graph(3, [(0, 1, 2.0), (1, 2, 4.0)], [], root=0)


class TestBuild:
    def test_path_depth_and_ancestors(self):
        _, _, idx = weighted_path3()
        assert idx.depth.tolist() == [0, 1, 2]
        assert idx.up[0].tolist() == [-1, 0, 1]
        assert idx.up[1][2] == 0

    def test_path_resistance_prefix(self):
        _, _, idx = weighted_path3()
        assert np.allclose(idx.res_to_root, [0.0, 0.5, 0.75])

    def test_star_depths_and_sentinels(self):
        _, _, idx = make_tree_graph(5, [(0, i) for i in range(1, 5)], [], root=0)
        assert idx.depth.tolist() == [0, 1, 1, 1, 1]
        assert np.all(idx.up[1:] == -1)

    def test_cyclic_parents_rejected(self):
        bad = SpanningTree(
            root=0,
            parent=np.array([-1, 2, 1]),
            parent_edge_weight=np.array([0.0, 1.0, 1.0]),
            tree_edge_ids=np.array([0, 1]),
            offtree_edge_ids=np.array([], dtype=np.int64),
        )
        with pytest.raises(StructureError):
            build_tree_index(bad)


class TestLca:
    def test_identity(self):
        _, _, idx = weighted_path3()
        for v in range(3):
            assert lca(idx, v, v) == v

    def test_fig_style_subtask_tree(self):
        # Tree realizing the worked subtask-division example: the first
        # edge group shares ancestor 1, the second shares ancestor 2
        # (0-based ids).
        edges = [
            (0, 1), (0, 2),
            (1, 3), (1, 4), (3, 8), (3, 5), (4, 10), (4, 6),
            (2, 7), (2, 11), (2, 12), (7, 13), (7, 9), (11, 15), (12, 14),
        ]
        _, _, idx = make_tree_graph(16, edges, [], root=0)
        for u, v in [(1, 8), (3, 10), (4, 8)]:
            assert lca(idx, u, v) == 1
        for u, v in [(2, 15), (7, 11), (11, 13), (12, 15)]:
            assert lca(idx, u, v) == 2

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_queries_match_walkup_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 200))
        parent, weight = random_parent_tree(rng, n)
        _, _, idx = tree_from_parents(parent, weight)
        us = rng.integers(0, n, size=350)
        vs = rng.integers(0, n, size=350)
        got = lca_batch(idx, us, vs)
        for u, v, a in zip(us.tolist(), vs.tolist(), got.tolist()):
            assert a == naive_lca(parent, u, v)
            assert lca(idx, u, v) == a


class TestResistance:
    def test_zero_on_same_vertex(self):
        _, _, idx = weighted_path3()
        assert resistance_distance(idx, 1, 1) == 0.0

    def test_weighted_path_value(self):
        _, _, idx = weighted_path3()
        assert resistance_distance(idx, 0, 2) == pytest.approx(0.75, rel=1e-12)

    @pytest.mark.parametrize("seed", [3, 4])
    def test_matches_dense_pseudoinverse(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 50))
        parent, weight = random_parent_tree(rng, n)
        g, _, idx = tree_from_parents(parent, weight)
        want = dense_effective_resistance(build_laplacian(g).toarray())
        for u in range(n):
            got = resistance_distance_batch(idx, np.full(n, u), np.arange(n))
            assert np.allclose(got, want[u], rtol=1e-9, atol=1e-12)

    def test_symmetry_and_triangle_equality(self):
        rng = np.random.default_rng(7)
        parent, weight = random_parent_tree(rng, 40)
        _, _, idx = tree_from_parents(parent, weight)
        for _ in range(200):
            u, v = rng.integers(0, 40, size=2)
            assert resistance_distance(idx, u, v) == pytest.approx(
                resistance_distance(idx, v, u), rel=1e-12
            )
            # any vertex on the u..v tree path splits the distance exactly
            a = lca(idx, u, v)
            x = int(u)
            path = [x]
            while x != a:
                x = int(parent[x]) if parent[x] >= 0 else x
                path.append(x)
            for mid in path:
                assert resistance_distance(idx, u, v) == pytest.approx(
                    resistance_distance(idx, u, mid) + resistance_distance(idx, mid, v),
                    rel=1e-9, abs=1e-12,
                )


class TestBetaStar:
    def test_min_of_two_depths(self, chain_branch):
        _, _, idx = chain_branch
        assert beta_star(idx, 4, 8) == 4

    def test_min_and_clamp_cases(self):
        # two chains below the root: one 10 deep (vertices 1..10), one 12
        # deep (vertices 11..22)
        chain_a = [(0, 1)] + [(i, i + 1) for i in range(1, 10)]
        chain_b = [(0, 11)] + [(i, i + 1) for i in range(11, 22)]
        _, _, idx = make_tree_graph(23, chain_a + chain_b, [], root=0)
        assert beta_star(idx, 3, 17, c=8) == 3     # depths 3 and 7 to the LCA
        assert beta_star(idx, 10, 22, c=8) == 8    # depths 10 and 12, clamped
        assert beta_star(idx, 10, 22, c=3) == 3

    def test_child_of_lca_gives_one(self, chain_branch):
        _, _, idx = chain_branch
        assert beta_star(idx, 1, 8) == 1

    @given(st.integers(0, 2**31 - 1), st.integers(1, 12))
    @settings(max_examples=60, deadline=None)
    def test_bounds(self, seed, c):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 60))
        parent, weight = random_parent_tree(rng, n)
        _, _, idx = tree_from_parents(parent, weight)
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u == v:
            v = (v + 1) % n
        b = beta_star(idx, u, v, c)
        a = lca(idx, u, v)
        assert b <= c
        assert b <= min(idx.depth[u] - idx.depth[a], idx.depth[v] - idx.depth[a])


class TestNeighborhood:
    def test_radius_zero(self, chain_branch):
        _, _, idx = chain_branch
        assert tree_neighborhood(idx, 3, 0).tolist() == [3]

    def test_chain_branch_example(self, chain_branch):
        _, _, idx = chain_branch
        assert tree_neighborhood(idx, 4, 4).tolist() == [0, 1, 2, 3, 4]
        assert tree_neighborhood(idx, 8, 4).tolist() == [0, 5, 6, 7, 8]

    def test_radius_at_least_diameter_covers_everything(self, chain_branch):
        _, _, idx = chain_branch
        assert tree_neighborhood(idx, 3, 20).size == 9

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(13)
        parent, weight = random_parent_tree(rng, 60)
        _, _, idx = tree_from_parents(parent, weight)
        for _ in range(30):
            u = int(rng.integers(0, 60))
            b1, b2 = sorted(rng.integers(0, 10, size=2).tolist())
            small = set(tree_neighborhood(idx, u, int(b1)).tolist())
            big = set(tree_neighborhood(idx, u, int(b2)).tolist())
            assert small <= big

    def test_matches_naive_ball(self):
        rng = np.random.default_rng(17)
        parent, weight = random_parent_tree(rng, 80)
        _, _, idx = tree_from_parents(parent, weight)
        for _ in range(50):
            u = int(rng.integers(0, 80))
            beta = int(rng.integers(0, 9))
            assert set(tree_neighborhood(idx, u, beta).tolist()) == naive_tree_ball(
                idx, u, beta
            )
