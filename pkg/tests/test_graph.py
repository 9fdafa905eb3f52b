import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partition_forge.errors import ParseError, ValidationError
from partition_forge.graph import (Graph, load_edge_list, load_labels, load_ratings, load_trust,
                                   write_edge_list, write_labels)
from partition_forge.metrics import modularity
from partition_forge.synthetic import planted_partition

from conftest import write


def test_triangle_from_text(tmp_path):
    g = load_edge_list(write(tmp_path / "g.txt", "0 1\n1 2\n2 0\n"))
    assert g.node_count == 3
    assert g.edge_count == 3
    assert np.all(g.weight == 1.0)


def test_duplicate_edges_merge_by_weight_sum(tmp_path):
    g = load_edge_list(write(tmp_path / "g.txt", "a b 2\nb a 3\n"))
    assert g.node_count == 2
    assert g.edge_count == 1
    assert g.weight[0] == 5.0
    assert g.id_map == {"a": 0, "b": 1}


def test_self_loop_dropped_with_warning(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        g = load_edge_list(write(tmp_path / "g.txt", "0 0\n"))
    assert g.node_count == 1
    assert g.edge_count == 0
    assert "self-loop" in caplog.text


def test_comments_and_csv(tmp_path):
    g = load_edge_list(write(tmp_path / "g.csv", "u,v,w\n# note\n1,2,0.5\n2,3,1.5\n"), "csv")
    assert g.node_count == 3
    assert g.total_weight == pytest.approx(2.0)


def test_malformed_line_reports_line_number(tmp_path):
    with pytest.raises(ParseError) as err:
        load_edge_list(write(tmp_path / "g.txt", "0 1\n0 1 2 3\n"))
    assert err.value.line == 2


def test_negative_weight_rejected(tmp_path):
    with pytest.raises(ValidationError):
        load_edge_list(write(tmp_path / "g.txt", "0 1 -1\n"))


def test_round_trip(tmp_path):
    g, _ = planted_partition(3, 10, 0.5, 0.05, seed=1)
    write_edge_list(g, tmp_path / "g.txt")
    h = load_edge_list(tmp_path / "g.txt")
    assert g == h


def test_round_trip_keeps_isolated_nodes(tmp_path):
    g = Graph.from_edges(5, [(0, 1), (1, 2)], weights=[0.25, 3.0])
    write_edge_list(g, tmp_path / "g.txt")
    assert load_edge_list(tmp_path / "g.txt") == g


def test_adjacency_symmetric_and_degree_sum():
    g, _ = planted_partition(4, 25, 0.3, 0.01, seed=0)
    for u in range(g.node_count):
        for v in g.neighbors(u):
            assert u in g.neighbors(v)
    assert g.degree.sum() == 2 * g.edge_count


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=30))
def test_simple_graph_invariants(pairs):
    g = Graph.from_edges(8, pairs)
    assert np.all(g.src < g.dst)
    keys = list(zip(g.src.tolist(), g.dst.tolist()))
    assert len(keys) == len(set(keys))
    expected = {(min(a, b), max(a, b)) for a, b in pairs if a != b}
    assert set(keys) == expected
    assert g.degree.sum() == 2 * g.edge_count


def test_labels_default_to_normal(tmp_path, caplog):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    labels = load_labels(write(tmp_path / "l.txt", "0 1\n"), g)
    assert labels.labels.tolist() == [1, 0, 0]
    assert labels.defaulted == 2


def test_labels_empty_file(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    labels = load_labels(write(tmp_path / "l.txt", ""), g)
    assert labels.labels.tolist() == [0, 0, 0]
    assert labels.defaulted == 3


def test_labels_out_of_domain(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(ValidationError):
        load_labels(write(tmp_path / "l.txt", "0 2\n"), g)


def test_labels_unknown_node(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(ValidationError):
        load_labels(write(tmp_path / "l.txt", "7 1\n"), g)


def test_labels_resolve_original_ids(tmp_path):
    g = load_edge_list(write(tmp_path / "g.txt", "x y\ny z\n"))
    labels = load_labels(write(tmp_path / "l.txt", "z 1\n"), g)
    assert labels.labels.tolist() == [0, 0, 1]
    write_labels(labels, tmp_path / "out.txt")
    assert (tmp_path / "out.txt").read_text() == "0 0\n1 0\n2 1\n"


def test_ratings_last_write_wins(tmp_path, caplog):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    text = "user,item,rating\n0,a,1\n0,a,4\n1,b,2\n9,a,3\n"
    with caplog.at_level(logging.WARNING):
        r = load_ratings(write(tmp_path / "r.csv", text), g)
    assert r.users.tolist() == [0, 1]
    assert r.ratings.tolist() == [4.0, 2.0]
    assert "duplicate" in caplog.text and "skipped" in caplog.text
    assert r.matrix(3).shape == (3, 2)


def test_trust_overlay(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    t = load_trust(write(tmp_path / "t.txt", "0 2\n2 0\n1 1\n"), g)
    assert sorted(map(tuple, t.trust.tolist())) == [(0, 2), (2, 0)]
    assert t == t and t.edge_count == g.edge_count


def test_planted_extremes_two_triangles():
    g, truth = planted_partition(2, 3, 1.0, 0.0, seed=0)
    assert g.edge_count == 6
    assert truth.assign.tolist() == [0, 0, 0, 1, 1, 1]
    assert set(zip(g.src.tolist(), g.dst.tolist())) == {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}


def test_planted_deterministic():
    a, _ = planted_partition(4, 25, 0.3, 0.01, seed=42)
    b, _ = planted_partition(4, 25, 0.3, 0.01, seed=42)
    assert a == b


def test_planted_without_structure_has_near_zero_modularity():
    g, truth = planted_partition(2, 50, 0.2, 0.2, seed=0)
    assert abs(modularity(g, truth)) <= 0.05


@pytest.mark.parametrize("seed", range(5))
def test_planted_components_are_blocks_when_p_out_zero(seed):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    from partition_forge.partition import canonical_assign

    g, truth = planted_partition(3, 12, 0.6, 0.0, seed=seed)
    adj = csr_matrix((g.adj_weight, g.indices, g.indptr), shape=(g.node_count, g.node_count))
    _, comp = connected_components(adj, directed=False)
    assert np.array_equal(canonical_assign(comp), truth.assign)


def test_planted_sparse_blocks_warn(caplog):
    with caplog.at_level(logging.WARNING):
        planted_partition(2, 5, 0.1, 0.0, seed=0)
    assert "fall apart" in caplog.text


def test_planted_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        planted_partition(1, 5, 0.5, 0.1, seed=0)
    with pytest.raises(ValidationError):
        planted_partition(2, 5, 0.1, 0.5, seed=0)
    with pytest.raises(ValidationError):
        planted_partition(2, 5, 1.5, 0.5, seed=0)
