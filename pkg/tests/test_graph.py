import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commroles import (DataError, DirectedGraph, EdgeListParseError, Partition,
                       PartitionError, community_degree, degree_split,
                       external_community_profile, load_edge_list)
from commroles.graph import load_graph, load_graph_cache, save_graph_cache

from conftest import G1_ARCS, graph_of, random_graph, random_partition


def _load(text: str, convention: str = "follow") -> DirectedGraph:
    return load_edge_list(io.BytesIO(text.encode()), convention)


class TestLoadEdgeList:
    def test_empty_input_is_empty_graph(self):
        g = _load("")
        assert g.n == 0 and g.m == 0

    def test_smallest_cycle(self):
        g = _load("1 2\n2 1\n")
        assert g.n == 2 and g.m == 2
        assert g.has_arc(g.to_internal(1), g.to_internal(2))
        assert g.has_arc(g.to_internal(2), g.to_internal(1))

    def test_duplicates_collapsed_and_self_loops_dropped(self):
        g = _load("1 2\n1 2\n3 3\n")
        assert g.n == 3 and g.m == 1
        assert g.duplicate_arcs == 1
        assert g.self_loops == 1

    def test_reverse_convention_flips_arcs(self):
        g = _load("1 2\n", convention="reverse")
        assert g.has_arc(g.to_internal(2), g.to_internal(1))
        assert not g.has_arc(g.to_internal(1), g.to_internal(2))

    def test_comments_and_blank_lines_ignored(self):
        g = _load("# header\n\n1 2\n  \n# trailing\n")
        assert g.m == 1

    @pytest.mark.parametrize("bad,line_no", [
        ("1 2\nx y\n", 2),
        ("1\n", 1),
        ("1 2 3\n", 1),
        ("1 2\n2\n", 2),
    ])
    def test_malformed_line_reports_line_number(self, bad, line_no):
        with pytest.raises(EdgeListParseError) as exc:
            _load(bad)
        assert exc.value.line_no == line_no

    def test_unknown_convention_rejected(self):
        with pytest.raises(DataError):
            _load("1 2\n", convention="sideways")

    def test_line_order_does_not_matter(self):
        rng = np.random.default_rng(0)
        lines = [f"{a} {b}" for a, b in [(5, 1), (1, 5), (9, 5), (1, 9), (9, 1)]]
        g_ref = _load("\n".join(lines))
        for _ in range(5):
            perm = rng.permutation(len(lines))
            g = _load("\n".join(lines[i] for i in perm))
            assert np.array_equal(g.ext_ids, g_ref.ext_ids)
            assert np.array_equal(g._out_indptr, g_ref._out_indptr)
            assert np.array_equal(g._out_indices, g_ref._out_indices)

    def test_negative_ids_rejected(self):
        with pytest.raises(DataError):
            _load("-1 2\n")


class TestDegrees:
    def test_degree_examples(self, g1):
        assert g1.degree(g1.to_internal(1), "out") == 3
        assert g1.degree(g1.to_internal(1), "in") == 2
        assert g1.degree(g1.to_internal(6), "total") == 0

    def test_unknown_node_errors(self, g1):
        with pytest.raises(DataError):
            g1.degree(99, "out")
        with pytest.raises(DataError):
            g1.to_internal(42)

    def test_community_degree_examples(self, g1, g1_partition):
        u1 = g1.to_internal(1)
        assert community_degree(g1, g1_partition, u1, 0, "out") == 2
        assert community_degree(g1, g1_partition, u1, 1, "in") == 1
        assert community_degree(g1, g1_partition, g1.to_internal(6), 0, "out") == 0

    def test_community_degree_invalid_community(self, g1, g1_partition):
        with pytest.raises(PartitionError):
            community_degree(g1, g1_partition, 0, 7, "out")

    def test_degree_split_examples(self, g1, g1_partition):
        u1 = g1.to_internal(1)
        assert degree_split(g1, g1_partition, u1, "out") == (2, 1)
        assert degree_split(g1, g1_partition, u1, "in") == (1, 1)
        assert degree_split(g1, g1_partition, g1.to_internal(6), "in") == (0, 0)

    def test_profile_examples(self, g1, g1_partition):
        assert external_community_profile(g1, g1_partition, g1.to_internal(1), "out") == {1: 1}
        assert external_community_profile(g1, g1_partition, g1.to_internal(2), "out") == {}

    def test_profile_sums_to_external_degree(self):
        # hub with out-arcs (5, 4, 1) into three external communities
        arcs = [(0, v) for v in range(1, 11)]
        g = graph_of(arcs, 11)
        comm = np.array([0] + [1] * 5 + [2] * 4 + [3])
        p = Partition(comm)
        profile = external_community_profile(g, p, 0, "out")
        assert profile == {1: 5, 2: 4, 3: 1}
        assert sum(profile.values()) == degree_split(g, p, 0, "out")[1] == 10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_degree_identities_random_graphs(seed):
    rng = np.random.default_rng(seed)
    arcs, n = random_graph(rng, max_n=30)
    g = graph_of(arcs, n)
    p = random_partition(rng, n)
    for u in range(n):
        for direction in ("in", "out"):
            internal, external = degree_split(g, p, u, direction)
            assert internal + external == g.degree(u, direction)
            total = sum(community_degree(g, p, u, c, direction) for c in range(p.c))
            assert total == g.degree(u, direction)


def test_adjacency_transpose_consistency():
    rng = np.random.default_rng(7)
    for _ in range(10):
        arcs, n = random_graph(rng)
        g = graph_of(arcs, n)
        from_out = {(u, int(v)) for u in range(n) for v in g.out_neighbors(u)}
        from_in = {(int(v), u) for u in range(n) for v in g.in_neighbors(u)}
        assert from_out == from_in == set(arcs)
        assert g.out_degrees().sum() == g.in_degrees().sum() == g.m


def test_neighbor_lists_sorted(g1):
    for u in range(g1.n):
        assert np.all(np.diff(g1.out_neighbors(u)) > 0)
        assert np.all(np.diff(g1.in_neighbors(u)) > 0)


class TestPartition:
    def test_densify_preserves_grouping(self):
        p = Partition.densify(np.array([5, 0, 9, 5, 0]))
        assert np.array_equal(p.assignment, [1, 0, 2, 1, 0])
        assert p.c == 3

    def test_non_dense_rejected(self):
        with pytest.raises(PartitionError):
            Partition(np.array([0, 2, 2]))

    def test_members_match_assignment(self):
        p = Partition(np.array([1, 0, 1, 0, 2]))
        assert np.array_equal(p.members(0), [1, 3])
        assert np.array_equal(p.members(1), [0, 2])
        assert np.array_equal(p.members(2), [4])
        assert np.array_equal(p.sizes(), [2, 2, 1])

    def test_every_node_exactly_one_community(self, g1_partition):
        assert g1_partition.sizes().sum() == g1_partition.n


def test_cache_round_trip(tmp_path, g1):
    path = tmp_path / "g.npz"
    save_graph_cache(path, g1)
    g2 = load_graph_cache(path)
    assert g2.n == g1.n and g2.m == g1.m
    assert np.array_equal(g2.ext_ids, g1.ext_ids)
    assert np.array_equal(g2._out_indices, g1._out_indices)
    assert np.array_equal(g2._in_indices, g1._in_indices)


def test_load_graph_dispatches_on_suffix(tmp_path, g1):
    txt = tmp_path / "g.txt"
    txt.write_text("".join(f"{a} {b}\n" for a, b in G1_ARCS))
    npz = tmp_path / "g.npz"
    save_graph_cache(npz, g1)
    ga = load_graph(txt)
    gb = load_graph(npz)
    assert gb.n == 6  # cache keeps the isolated node, text file cannot
    assert ga.n == 5
    assert ga.m == gb.m == 5


def test_id_mapping_bijection(g1):
    ids = g1.ext_ids
    assert np.array_equal(g1.to_external(np.asarray(g1.to_internal(ids))), ids)
