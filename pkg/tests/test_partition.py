import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partition_forge.errors import ParseError, ValidationError
from partition_forge.graph import Graph, load_edge_list
from partition_forge.partition import (Partition, augment, canonical_assign, canonicalize,
                                       random_partition, read_partition, write_partition)

from conftest import two_triangles, write

assignments = st.lists(st.integers(0, 9), min_size=1, max_size=40)


@pytest.mark.parametrize("raw, expected, k", [
    ([5, 5, 9], [0, 0, 1], 2),
    ([0, 1, 2], [0, 1, 2], 3),
    ([2, 2, 2], [0, 0, 0], 1),
    ([3, 1, 3, 0, 1], [0, 1, 0, 2, 1], 3),
])
def test_canonicalize_examples(raw, expected, k):
    p = canonicalize(Partition(raw))
    assert p.assign.tolist() == expected
    assert p.k == k
    assert p.is_canonical


def _first_appearance(raw):
    seen = {}
    return [seen.setdefault(c, len(seen)) for c in raw]


@settings(max_examples=200, deadline=None)
@given(assignments)
def test_canonical_matches_reference_and_is_idempotent(raw):
    once = canonical_assign(raw)
    assert once.tolist() == _first_appearance(raw)
    assert np.array_equal(canonical_assign(once), once)


@settings(max_examples=100, deadline=None)
@given(assignments, st.permutations(list(range(10))))
def test_relabeling_gives_identical_canonical_form(raw, perm):
    relabeled = [perm[c] for c in raw]
    assert np.array_equal(canonical_assign(raw), canonical_assign(relabeled))
    assert Partition(raw).same_grouping(Partition(relabeled))


def test_random_partition_single_community():
    g = two_triangles()
    p = random_partition(g, 1, 1, seed=0)
    assert p.assign.tolist() == [0] * 6


def test_random_partition_range_and_determinism():
    g = Graph.from_edges(2285, [(i, i + 1) for i in range(2284)])
    for seed in range(5):
        p = random_partition(g, seed=seed)
        assert 1 <= p.k <= 160
        assert p.is_canonical
        assert p == random_partition(g, seed=seed)


def test_random_partition_clamps_k_max(caplog):
    g = two_triangles()
    with caplog.at_level(logging.WARNING):
        p = random_partition(g, 1, 50, seed=0)
    assert p.k <= 6
    assert "clamping" in caplog.text


def test_random_partition_rejects_bad_range():
    with pytest.raises(ValidationError):
        random_partition(two_triangles(), 5, 2)
    with pytest.raises(ValidationError):
        random_partition(two_triangles(), 0, 2)


def test_augment_single_community():
    g = two_triangles(bridge=True)
    aug = augment(g, Partition(np.zeros(6, dtype=int)))
    assert aug.aux_count == 0
    assert aug.membership_count.tolist() == [1] * 6


def test_augment_bridge():
    g = two_triangles(bridge=True)
    aug = augment(g, Partition([0, 0, 0, 1, 1, 1]))
    assert aug.aux_count == 1
    assert aug.membership_count.tolist() == [1, 1, 2, 2, 1, 1]
    assert aug.aux_edges.tolist() == [[2, 3]]


def test_augment_path_singletons():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    aug = augment(g, Partition([0, 1, 2]))
    assert aug.aux_count == 2
    assert aug.membership_count[1] == 3


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=40),
       st.lists(st.integers(0, 3), min_size=10, max_size=10))
def test_augment_membership_sum(pairs, raw):
    g = Graph.from_edges(10, pairs)
    aug = augment(g, Partition(raw))
    assert int((aug.membership_count - 1).sum()) == 2 * aug.aux_count
    cross = sum(1 for u, v in zip(g.src, g.dst) if raw[u] != raw[v])
    assert aug.aux_count == cross


def test_augment_rejects_wrong_size():
    with pytest.raises(ValidationError):
        augment(two_triangles(), Partition([0, 1]))


def test_partition_file_round_trip(tmp_path):
    g = load_edge_list(write(tmp_path / "g.txt", "x y\ny z\nz w\n"))
    p = Partition([1, 1, 0, 0])
    write_partition(p, tmp_path / "p.part", g.original_ids())
    q = read_partition(tmp_path / "p.part", g)
    assert q.assign.tolist() == [0, 0, 1, 1]


def test_partition_file_errors(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(ValidationError):
        read_partition(write(tmp_path / "a.part", "0 0\n1 0\n"), g)
    with pytest.raises(ParseError):
        read_partition(write(tmp_path / "b.part", "0 0 0\n"), g)
    with pytest.raises(ParseError):
        read_partition(write(tmp_path / "c.part", "0 x\n"), g)
