"""Baseline community detectors: single community, Louvain, label propagation."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .errors import EmptyGraphError
from .graph import Graph
from .partition import Partition, canonical_assign

__all__ = ["single_community", "louvain", "label_propagation", "nmi", "DETECTORS"]

# Minimum modularity gain (in units of m * dQ) for a Louvain move; keeps
# floating-point noise from cycling nodes between equivalent communities.
_MIN_GAIN = 1e-12


def single_community(g: Graph) -> Partition:
    return Partition(np.zeros(g.node_count, dtype=np.int64))


def _level_modularity(adj, self_w, comm, m, resolution):
    k = int(comm.max()) + 1
    inner = np.zeros(k)
    tot = np.zeros(k)
    for i, nbrs in enumerate(adj):
        ci = comm[i]
        inner[ci] += self_w[i]
        tot[ci] += 2 * self_w[i]
        for j, w in nbrs.items():
            tot[ci] += w
            if comm[j] == ci:
                inner[ci] += w / 2
    return float(np.sum(inner / m - resolution * (tot / (2 * m)) ** 2))


def _move_nodes(adj, self_w, rng, resolution, m):
    size = len(adj)
    strength = np.array([sum(nbrs.values()) + 2 * self_w[i] for i, nbrs in enumerate(adj)])
    comm = np.arange(size)
    tot = strength.copy()
    m2 = 2.0 * m
    any_move = False
    while True:
        moved = False
        for i in rng.permutation(size).tolist():
            ci = comm[i]
            k_i = strength[i]
            links = defaultdict(float)
            for j, w in adj[i].items():
                links[comm[j]] += w
            tot[ci] -= k_i
            best = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * k_i / m2
            for c in sorted(links):
                gain = links[c] - resolution * tot[c] * k_i / m2
                if gain > best_gain + _MIN_GAIN:
                    best, best_gain = c, gain
            tot[best] += k_i
            if best != ci:
                comm[i] = best
                moved = any_move = True
        if not moved:
            return comm, any_move


def _aggregate(adj, self_w, comm):
    k = int(comm.max()) + 1
    new_adj = [defaultdict(float) for _ in range(k)]
    new_self = np.zeros(k)
    for i, nbrs in enumerate(adj):
        ci = comm[i]
        new_self[ci] += self_w[i]
        for j, w in nbrs.items():
            cj = comm[j]
            if ci == cj:
                new_self[ci] += w / 2
            else:
                new_adj[ci][cj] += w
    return [dict(d) for d in new_adj], new_self


def louvain(g: Graph, seed=None, resolution: float = 1.0, trace=None) -> Partition:
    """Two-phase Louvain modularity maximization.

    Nodes are visited in a seed-shuffled order. A node only leaves its
    community for a strictly better gain; equal gains elsewhere go to the
    smallest community id.

    Args:
        g: Graph with at least one edge.
        seed: RNG seed for the visit order.
        resolution: Modularity resolution parameter.
        trace: Optional ``trace(level, modularity)`` callback, called for
            the singleton start (level 0) and after each aggregation.

    Returns:
        Canonical partition.
    """
    m = g.total_weight
    if m <= 0:
        raise EmptyGraphError("louvain needs at least one weighted edge")
    rng = np.random.default_rng(seed)
    adj = [defaultdict(float) for _ in range(g.node_count)]
    for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()):
        adj[u][v] += w
        adj[v][u] += w
    adj = [dict(d) for d in adj]
    self_w = np.zeros(g.node_count)
    membership = np.arange(g.node_count)
    level = 0
    if trace is not None:
        trace(level, _level_modularity(adj, self_w, np.arange(len(adj)), m, resolution))
    while True:
        comm, moved = _move_nodes(adj, self_w, rng, resolution, m)
        if not moved:
            break
        comm = canonical_assign(comm)
        membership = comm[membership]
        adj, self_w = _aggregate(adj, self_w, comm)
        level += 1
        if trace is not None:
            trace(level, _level_modularity(adj, self_w, np.arange(len(adj)), m, resolution))
        if len(adj) == 1:
            break
    return Partition(canonical_assign(membership))


def label_propagation(g: Graph, seed=None, max_rounds: int = 100) -> Partition:
    """Asynchronous label propagation.

    Every node starts with its own label. Each round visits nodes in a
    shuffled order and gives each the most frequent label among its
    neighbors, breaking ties at random. A node whose current label is
    already among the most frequent keeps it, so the run stops once a
    full round changes nothing.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(g.node_count)
    for _ in range(max_rounds):
        changed = False
        for i in rng.permutation(g.node_count).tolist():
            nb = g.neighbors(i)
            if len(nb) == 0:
                continue
            values, counts = np.unique(labels[nb], return_counts=True)
            top = values[counts == counts.max()]
            if labels[i] in top:
                continue
            labels[i] = top[int(rng.integers(len(top)))]
            changed = True
        if not changed:
            break
    return Partition(canonical_assign(labels))


DETECTORS = {
    "single": lambda g, seed=None: single_community(g),
    "louvain": lambda g, seed=None: louvain(g, seed=seed),
    "labelprop": lambda g, seed=None: label_propagation(g, seed=seed),
}


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(a, b) -> float:
    """Normalized mutual information, arithmetic-mean normalization."""
    a = canonical_assign(a.assign if isinstance(a, Partition) else a)
    b = canonical_assign(b.assign if isinstance(b, Partition) else b)
    n = len(a)
    if n != len(b):
        raise ValueError("partitions differ in length")
    ka, kb = int(a.max()) + 1, int(b.max()) + 1
    joint = np.bincount(a * kb + b, minlength=ka * kb).reshape(ka, kb).astype(np.float64)
    ha = _entropy(joint.sum(axis=1), n)
    hb = _entropy(joint.sum(axis=0), n)
    if ha == 0 and hb == 0:
        return 1.0
    pa = joint.sum(axis=1) / n
    pb = joint.sum(axis=0) / n
    nz = joint > 0
    pij = joint[nz] / n
    mi = float(np.sum(pij * np.log(pij / np.outer(pa, pb)[nz])))
    return max(0.0, 2.0 * mi / (ha + hb))
