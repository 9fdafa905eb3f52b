"""Planted-partition graphs and the synthetic downstream benchmarks built on them."""

from __future__ import annotations

import logging

import numpy as np

from .errors import ValidationError
from .graph import Graph, NodeLabels, RatingsTable
from .partition import Partition

logger = logging.getLogger(__name__)

__all__ = ["planted_partition", "planted_anomalies", "planted_trust"]


def _check_probs(p_in, p_out):
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"{name}={p} outside [0, 1]")
    if p_in < p_out:
        raise ValidationError(f"p_in={p_in} must not be below p_out={p_out}")


def planted_partition(blocks: int, block_size: int, p_in: float, p_out: float,
                      seed=None) -> tuple[Graph, Partition]:
    """Random graph with ``blocks`` equal blocks of consecutive node ids.

    Each pair inside a block is joined with probability ``p_in``, each pair
    across blocks with ``p_out``. Returns the graph and the block partition.
    """
    if blocks < 2:
        raise ValidationError(f"need at least 2 blocks, got {blocks}")
    if block_size < 1:
        raise ValidationError(f"block_size must be positive, got {block_size}")
    _check_probs(p_in, p_out)
    if p_in * (block_size - 1) < 1:
        logger.warning("p_in*(block_size-1)=%.3g < 1: blocks are expected to fall apart",
                       p_in * (block_size - 1))
    rng = np.random.default_rng(seed)
    n = blocks * block_size
    block = np.repeat(np.arange(blocks), block_size)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(block[iu] == block[ju], p_in, p_out)
    keep = rng.random(len(iu)) < prob
    g = Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))
    return g, Partition(block)


def planted_anomalies(blocks=4, block_size=50, p_in=0.3, p_out=0.01, anomaly_frac=0.1,
                      rewire_frac=1.0, seed=None) -> tuple[Graph, Partition, NodeLabels]:
    """Planted partition where a fraction of nodes have their edges scattered.

    Each anomalous node has each of its within-block edges redirected, with
    probability ``rewire_frac``, to a uniformly random node of another
    block. Those nodes are labeled 1.

    Returns:
        ``(graph, planted_partition, labels)``.
    """
    rng = np.random.default_rng(seed)
    g0, truth = planted_partition(blocks, block_size, p_in, p_out, seed=rng)
    n = g0.node_count
    block = truth.assign
    n_anom = int(round(anomaly_frac * n))
    anomalous = np.sort(rng.choice(n, size=n_anom, replace=False))
    edges = {(u, v) for u, v in zip(g0.src.tolist(), g0.dst.tolist())}
    nbrs = [set() for _ in range(n)]
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    for u in anomalous.tolist():
        outside = np.flatnonzero(block != block[u])
        for x in sorted(nbrs[u]):
            if block[x] != block[u] or rng.random() >= rewire_frac:
                continue
            free = [y for y in outside.tolist() if y not in nbrs[u]]
            if not free:
                break
            y = free[int(rng.integers(len(free)))]
            edges.discard((min(u, x), max(u, x)))
            nbrs[u].discard(x)
            nbrs[x].discard(u)
            edges.add((min(u, y), max(u, y)))
            nbrs[u].add(y)
            nbrs[y].add(u)
    g = Graph.from_edges(n, sorted(edges))
    labels = np.zeros(n, dtype=np.int64)
    labels[anomalous] = 1
    return g, truth, NodeLabels(labels)


def planted_trust(blocks=4, block_size=50, p_in=0.3, p_out=0.01, n_items=200,
                  ratings_per_user=30, noise=1.0, reciprocity=0.3,
                  seed=None) -> tuple[Graph, RatingsTable, Partition]:
    """Planted social graph with a directed trust overlay and block-driven ratings.

    Every undirected edge becomes a trust edge in a random direction, and
    in both directions with probability ``reciprocity``. Each block has a
    latent taste per item; a user's rating is its block's taste plus
    Gaussian noise, on ``ratings_per_user`` random items.
    """
    rng = np.random.default_rng(seed)
    g, truth = planted_partition(blocks, block_size, p_in, p_out, seed=rng)
    flip = rng.random(g.edge_count) < 0.5
    a = np.where(flip, g.dst, g.src)
    b = np.where(flip, g.src, g.dst)
    both = rng.random(g.edge_count) < reciprocity
    trust = np.concatenate([np.column_stack([a, b]), np.column_stack([b[both], a[both]])])
    g = g.with_trust(trust)

    taste = rng.normal(size=(blocks, n_items))
    per_user = min(ratings_per_user, n_items)
    users, items, values = [], [], []
    for u in range(g.node_count):
        chosen = np.sort(rng.choice(n_items, size=per_user, replace=False))
        users.append(np.full(per_user, u))
        items.append(chosen)
        values.append(taste[truth.assign[u], chosen] + noise * rng.normal(size=per_user))
    ratings = RatingsTable(np.concatenate(users).astype(np.int64),
                           np.concatenate(items).astype(np.int64),
                           np.concatenate(values),
                           [str(i) for i in range(n_items)])
    return g, ratings, truth
