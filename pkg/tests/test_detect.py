import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import normalized_mutual_info_score

from partition_forge.detect import DETECTORS, label_propagation, louvain, nmi, single_community
from partition_forge.errors import EmptyGraphError
from partition_forge.graph import Graph
from partition_forge.metrics import modularity, property_vector
from partition_forge.partition import Partition
from partition_forge.synthetic import planted_partition

from conftest import two_triangles


def karate():
    kg = nx.karate_club_graph()
    return Graph.from_edges(34, list(kg.edges())), kg


def test_single_community():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    assert single_community(g).assign.tolist() == [0, 0, 0]
    g100, _ = planted_partition(2, 50, 0.1, 0.01, seed=0)
    p = single_community(g100)
    assert p.k == 1
    assert property_vector(g100, p).modularity == pytest.approx(0.0, abs=1e-15)


def test_louvain_two_triangles():
    g = two_triangles()
    p = louvain(g, seed=0)
    assert p.assign.tolist() == [0, 0, 0, 1, 1, 1]
    assert modularity(g, p) == pytest.approx(0.5)


def test_louvain_karate_against_reference():
    g, kg = karate()
    ours = max(modularity(g, louvain(g, seed=s)) for s in range(3))
    comm = nx.algorithms.community
    ref = max(comm.modularity(kg, comm.louvain_communities(kg, weight=None, seed=s), weight=None)
              for s in range(3))
    assert ours >= 0.40
    assert ours >= ref - 0.02


@pytest.mark.parametrize("seed", range(3))
def test_louvain_recovers_planted(seed):
    g, truth = planted_partition(4, 25, 0.3, 0.01, seed=seed)
    assert nmi(louvain(g, seed=seed), truth) >= 0.9


def test_louvain_deterministic_and_canonical():
    g, _ = planted_partition(4, 25, 0.3, 0.05, seed=1)
    a, b = louvain(g, seed=7), louvain(g, seed=7)
    assert a == b
    assert a.is_canonical


def test_louvain_trace_is_non_decreasing():
    g, _ = planted_partition(5, 30, 0.2, 0.02, seed=4)
    trace = []
    p = louvain(g, seed=0, trace=lambda level, q: trace.append(q))
    singletons = modularity(g, Partition(np.arange(g.node_count)))
    assert trace[0] >= singletons - 1e-12
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
    assert modularity(g, p) == pytest.approx(trace[-1], abs=1e-9)


def test_louvain_edgeless_raises():
    with pytest.raises(EmptyGraphError):
        louvain(Graph.from_edges(4, []), seed=0)


def test_label_propagation_components():
    assert label_propagation(two_triangles(), seed=0).assign.tolist() == [0, 0, 0, 1, 1, 1]


def test_label_propagation_edgeless():
    assert label_propagation(Graph.from_edges(4, []), seed=0).assign.tolist() == [0, 1, 2, 3]


def test_label_propagation_deterministic():
    g, _ = planted_partition(4, 25, 0.3, 0.01, seed=2)
    assert label_propagation(g, seed=3) == label_propagation(g, seed=3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), max_size=40),
       st.integers(0, 1000), st.integers(1, 5))
def test_label_propagation_valid_output(pairs, seed, rounds):
    g = Graph.from_edges(15, pairs)
    p = label_propagation(g, seed=seed, max_rounds=rounds)
    assert p.node_count == 15 and p.is_canonical
    # a community never spans two connected components
    comp = _components(g)
    for c in np.unique(p.assign):
        assert len({comp[i] for i in np.flatnonzero(p.assign == c)}) == 1


def _components(g):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    adj = csr_matrix((g.adj_weight, g.indices, g.indptr), shape=(g.node_count,) * 2)
    return connected_components(adj, directed=False)[1]


def test_detector_registry():
    assert set(DETECTORS) == {"single", "louvain", "labelprop"}
    g = two_triangles()
    for fn in DETECTORS.values():
        assert fn(g, seed=0).node_count == 6


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=30), st.data())
def test_nmi_matches_sklearn(a, data):
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    expected = normalized_mutual_info_score(a, b, average_method="arithmetic")
    assert nmi(np.array(a), np.array(b)) == pytest.approx(expected, abs=1e-10)


def test_nmi_identity_and_relabeling():
    a = np.array([0, 0, 1, 1, 2, 2])
    assert nmi(a, a) == pytest.approx(1.0)
    assert nmi(a, 5 - a) == pytest.approx(1.0)
