import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partition_forge.errors import EmptyGraphError, ValidationError
from partition_forge.graph import Graph
from partition_forge.metrics import (FITNESS_TAGS, PROPERTY_NAMES, PropertyVector,
                                     community_stats, correlation_matrix, fitness_value,
                                     local_clustering, modularity, property_vector)
from partition_forge.partition import Partition, canonical_assign
from partition_forge.synthetic import planted_partition

from conftest import star, two_triangles
from oracles import brute_metrics, naive_correlation, set_partitions


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def test_single_community_modularity_zero():
    g, _ = planted_partition(3, 10, 0.4, 0.05, seed=3)
    assert modularity(g, Partition(np.zeros(g.node_count, dtype=int))) == pytest.approx(0.0, abs=1e-15)


def test_two_triangles_modularity_half():
    assert modularity(two_triangles(), Partition([0, 0, 0, 1, 1, 1])) == pytest.approx(0.5, abs=1e-12)


def test_edgeless_graph_modularity_raises():
    with pytest.raises(EmptyGraphError):
        modularity(Graph.from_edges(3, []), Partition([0, 1, 2]))


def test_modularity_matches_networkx_on_karate():
    kg = nx.karate_club_graph()
    g = Graph.from_edges(34, list(kg.edges()))
    clubs = [0 if kg.nodes[i]["club"] == "Mr. Hi" else 1 for i in range(34)]
    groups = [{i for i in range(34) if clubs[i] == c} for c in (0, 1)]
    expected = nx.algorithms.community.modularity(nx.Graph(list(kg.edges())), groups)
    assert modularity(g, Partition(clubs)) == pytest.approx(expected, abs=1e-12)


def test_weighted_modularity_matches_networkx(rng):
    pairs = {(int(a), int(b)) for a, b in rng.integers(0, 12, size=(40, 2)) if a < b}
    edges = sorted(pairs)
    w = rng.uniform(0.1, 3.0, size=len(edges))
    g = Graph.from_edges(12, edges, w)
    assign = rng.integers(0, 3, size=12)
    ng = nx.Graph()
    ng.add_nodes_from(range(12))
    ng.add_weighted_edges_from([(u, v, x) for (u, v), x in zip(edges, w)])
    groups = [set(np.flatnonzero(assign == c).tolist()) for c in np.unique(assign)]
    expected = nx.algorithms.community.modularity(ng, groups, weight="weight")
    assert modularity(g, Partition(assign)) == pytest.approx(expected, abs=1e-12)


def test_triangle_community_stats():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    s = community_stats(g, Partition([0, 0, 0]))
    assert s.density[0] == 1.0
    assert s.conductance[0] == 0.0
    assert s.avg_local_clustering[0] == 1.0


def test_path_split_conductance():
    s = community_stats(path(4), Partition([0, 0, 1, 1]))
    assert s.cut_size.tolist() == [1.0, 1.0]
    assert s.total_degree.tolist() == [3.0, 3.0]
    assert s.conductance == pytest.approx([1 / 3, 1 / 3])


def test_star_centralization():
    s = community_stats(star(4), Partition([0] * 5))
    assert s.centralization[0] == pytest.approx(1.0)


def test_regular_community_centralization_zero():
    cycle = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert community_stats(cycle, Partition([0] * 5)).centralization[0] == 0.0


def test_small_communities_centralization_and_density_zero():
    s = community_stats(path(4), Partition([0, 0, 1, 2]))
    assert s.centralization.tolist() == [0.0, 0.0, 0.0]
    assert s.density.tolist() == [1.0, 0.0, 0.0]


def test_two_triangles_property_vector():
    pv = property_vector(two_triangles(), Partition([0, 0, 0, 1, 1, 1]))
    assert pv.modularity == pytest.approx(0.5)
    assert pv.num_communities == 2
    assert pv.avg_density == 1.0
    assert pv.avg_cut_size == 0.0
    assert pv.avg_conductance == 0.0
    assert pv.avg_clustering_coefficient == 1.0


def test_single_community_property_vector():
    g, _ = planted_partition(2, 10, 0.5, 0.1, seed=0)
    pv = property_vector(g, Partition(np.zeros(20, dtype=int)))
    assert pv.num_communities == 1
    assert pv.top3_avg_size == 20
    assert pv.modularity == pytest.approx(0.0, abs=1e-15)


def test_top3_uses_largest_communities_ties_by_id():
    g = path(9)
    # sizes 1, 3, 2, 3 -> top-3 = communities 1, 3, 2
    assign = [0, 1, 1, 1, 2, 2, 3, 3, 3]
    pv = property_vector(g, Partition(assign))
    s = community_stats(g, Partition(assign))
    top = [1, 3, 2]
    assert pv.top3_avg_size == pytest.approx(np.mean(s.size[top]))
    assert pv.top3_avg_density == pytest.approx(np.mean(s.density[top]))
    assert pv.top3_avg_cut_size == pytest.approx(np.mean(s.cut_size[top]))
    assert pv.top3_avg_conductance == pytest.approx(np.mean(s.conductance[top]))


def test_property_vector_layout():
    assert len(PROPERTY_NAMES) == 11
    pv = property_vector(two_triangles(), Partition([0, 0, 1, 1, 2, 2]))
    assert list(pv.as_dict()) == list(PROPERTY_NAMES)
    assert PropertyVector.from_array(pv.to_array()) == pv
    with pytest.raises(ValidationError):
        PropertyVector.from_array([1.0] * 10)


def test_local_clustering_matches_networkx():
    kg = nx.karate_club_graph()
    g = Graph.from_edges(34, list(kg.edges()))
    expected = nx.clustering(nx.Graph(list(kg.edges())))
    got = local_clustering(g)
    assert got == pytest.approx([expected[i] for i in range(34)], abs=1e-12)


def test_community_clustering_matches_induced_networkx(rng):
    g, _ = planted_partition(3, 12, 0.5, 0.1, seed=5)
    assign = rng.integers(0, 4, size=g.node_count)
    s = community_stats(g, Partition(assign))
    ng = nx.Graph(list(zip(g.src.tolist(), g.dst.tolist())))
    ng.add_nodes_from(range(g.node_count))
    for c in range(s.k):
        members = np.flatnonzero(canonical_assign(assign) == c).tolist()
        cc = nx.clustering(ng.subgraph(members))
        assert s.avg_local_clustering[c] == pytest.approx(np.mean([cc[v] for v in members]), abs=1e-12)


def _random_graph(data, n):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                               min_size=1, max_size=3 * n))
    weights = data.draw(st.lists(st.floats(0.1, 5.0), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, pairs, weights)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_stats_identities(data):
    n = data.draw(st.integers(2, 12))
    g = _random_graph(data, n)
    assign = data.draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    s = community_stats(g, Partition(assign))
    assert s.total_degree == pytest.approx(2 * s.internal_edges + s.cut_size)
    assert s.internal_edges.sum() + s.cut_size.sum() / 2 == pytest.approx(g.total_weight)
    pv = property_vector(g, Partition(assign)) if g.edge_count else None
    if pv is not None:
        assert -0.5 - 1e-12 <= pv.modularity <= 1.0
        assert (pv.avg_conductance == 0) == bool(np.all(s.cut_size == 0))
        for name in ("avg_density", "avg_conductance", "avg_centralization",
                     "avg_clustering_coefficient", "top3_avg_density", "top3_avg_conductance"):
            assert 0.0 <= getattr(pv, name) <= 1.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_invariance_under_relabeling_and_permutation(data):
    n = data.draw(st.integers(3, 10))
    g = _random_graph(data, n)
    if g.edge_count == 0:
        return
    assign = np.array(data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n)))
    perm = np.array(data.draw(st.permutations(list(range(n)))))
    g2 = Graph.from_edges(n, np.column_stack([perm[g.src], perm[g.dst]]), g.weight)
    assign2 = np.empty(n, dtype=int)
    assign2[perm] = assign + 7
    a = property_vector(g, Partition(assign)).to_array()
    b = property_vector(g2, Partition(assign2)).to_array()
    # community averages are order-free; top-3 ties may pick different equal-size sets
    assert a[:7] == pytest.approx(b[:7], abs=1e-12)
    assert a[9] == pytest.approx(b[9])


@pytest.mark.parametrize("seed", range(5))
def test_component_refinement_does_not_lower_modularity(seed):
    g, truth = planted_partition(3, 8, 0.7, 0.0, seed=seed)
    single = Partition(np.zeros(g.node_count, dtype=int))
    assert modularity(g, truth) >= modularity(g, single)


def test_fitness_values_agree_with_property_vector(rng):
    g, _ = planted_partition(3, 15, 0.4, 0.05, seed=2)
    for _ in range(10):
        assign = canonical_assign(rng.integers(0, 6, size=g.node_count))
        pv = property_vector(g, Partition(assign))
        expected = {"modularity": pv.modularity, "avg_density": pv.avg_density,
                    "avg_clustering_coefficient": pv.avg_clustering_coefficient,
                    "neg_avg_conductance": -pv.avg_conductance}
        for tag in FITNESS_TAGS:
            assert fitness_value(g, assign, tag) == pytest.approx(expected[tag], abs=1e-12)


def test_brute_force_oracle_small_sample():
    # the exhaustive sweep lives in the acceptance suite; this is a quick sample
    g = two_triangles(bridge=True)
    edges = list(zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()))
    for assign in list(set_partitions(range(6)))[::7]:
        q, per = brute_metrics(6, edges, assign)
        s = community_stats(g, Partition(assign))
        assert modularity(g, Partition(assign)) == pytest.approx(q, abs=1e-12)
        for c, (density, cut, cond) in per.items():
            assert s.density[c] == pytest.approx(density, abs=1e-12)
            assert s.cut_size[c] == pytest.approx(cut, abs=1e-12)
            assert s.conductance[c] == pytest.approx(cond, abs=1e-12)


def test_correlation_perfect_and_anti():
    base = np.arange(10, dtype=float)
    rows = np.column_stack([base, base, -base + 3] + [np.sin(base + i) for i in range(8)])
    corr = correlation_matrix(rows).matrix
    assert corr[0, 1] == pytest.approx(1.0)
    assert corr[0, 2] == pytest.approx(-1.0)
    assert np.allclose(corr, corr.T)
    assert np.allclose(np.diag(corr), 1.0)


def test_correlation_matches_two_pass_oracle(rng):
    rows = rng.normal(size=(100, 11)) @ rng.normal(size=(11, 11))
    got = correlation_matrix(rows).matrix
    assert np.allclose(got, naive_correlation(rows.tolist()), atol=1e-9)


def test_correlation_constant_column_flagged():
    rows = np.column_stack([np.arange(5.0), np.ones(5), np.arange(5.0) ** 2])
    res = correlation_matrix(rows)
    assert res.constant.tolist() == [False, True, False]
    assert res.matrix[1].tolist() == [0.0, 0.0, 0.0]
    assert res.matrix[0, 0] == 1.0


def test_correlation_needs_two_rows():
    with pytest.raises(ValidationError):
        correlation_matrix(np.ones((1, 11)))


def test_correlation_accepts_property_vectors():
    g = two_triangles(bridge=True)
    rows = [property_vector(g, Partition(a)) for a in ([0, 0, 0, 1, 1, 1], [0, 0, 1, 1, 2, 2],
                                                        [0, 1, 2, 3, 4, 5], [0, 0, 0, 0, 1, 1])]
    corr = correlation_matrix(rows)
    assert corr.matrix.shape == (11, 11)
    assert not math.isnan(corr.matrix.sum())
