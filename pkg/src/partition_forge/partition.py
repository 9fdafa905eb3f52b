"""Non-overlapping community assignments and their auxiliary augmentation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .graph import Graph

logger = logging.getLogger(__name__)

__all__ = [
    "Partition",
    "AugmentedMembership",
    "canonical_assign",
    "canonicalize",
    "random_partition",
    "augment",
    "read_partition",
    "write_partition",
]


def canonical_assign(assign) -> np.ndarray:
    """Relabel community ids to ``0..k-1`` by first appearance in node order."""
    assign = np.asarray(assign)
    n = assign.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.argsort(assign.reshape(-1), kind="stable")
    ranked = assign.reshape(-1)[order]
    starts = np.flatnonzero(np.concatenate(([True], ranked[1:] != ranked[:-1])))
    rank = np.empty(len(starts), dtype=np.int64)
    rank[np.argsort(order[starts], kind="stable")] = np.arange(len(starts))
    out = np.empty(n, dtype=np.int64)
    out[order] = np.repeat(rank, np.diff(np.append(starts, n)))
    return out


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of every node to exactly one community."""

    assign: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assign, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "assign", a)

    @property
    def node_count(self) -> int:
        return len(self.assign)

    @property
    def k(self) -> int:
        return len(np.unique(self.assign))

    @property
    def is_canonical(self) -> bool:
        return bool(np.array_equal(self.assign, canonical_assign(self.assign)))

    def sizes(self) -> np.ndarray:
        """Community sizes indexed by (canonical) community id."""
        return np.bincount(canonical_assign(self.assign))

    def members(self, community: int) -> np.ndarray:
        return np.flatnonzero(self.assign == community)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assign, other.assign)

    def same_grouping(self, other: Partition) -> bool:
        """True when both induce the same set-partition of the nodes."""
        return np.array_equal(canonical_assign(self.assign), canonical_assign(other.assign))

    __hash__ = None

    def __len__(self):
        return len(self.assign)


def canonicalize(p: Partition) -> Partition:
    return Partition(canonical_assign(p.assign))


def random_partition(g: Graph, k_min=20, k_max=160, seed=None) -> Partition:
    """Assign nodes to uniformly random communities, ignoring the edges.

    The target community count is drawn uniformly from ``[k_min, k_max]``;
    communities left empty collapse on canonicalization, so the realized
    count can be lower.
    """
    if k_min < 1 or k_min > k_max:
        raise ValidationError(f"need 1 <= k_min <= k_max, got {k_min}, {k_max}")
    rng = np.random.default_rng(seed)
    n = g.node_count
    if k_max > n:
        logger.warning("k_max=%d exceeds node count %d; clamping", k_max, n)
        k_max = max(n, 1)
        k_min = min(k_min, k_max)
    k = int(rng.integers(k_min, k_max + 1))
    return Partition(canonical_assign(rng.integers(0, k, size=n)))


def check_partition(g: Graph, p: Partition) -> None:
    if p.node_count != g.node_count:
        raise ValidationError(
            f"partition covers {p.node_count} nodes, graph has {g.node_count}")


@dataclass(frozen=True, eq=False)
class AugmentedMembership:
    """Primary communities plus one size-2 auxiliary community per cross edge.

    Attributes:
        primary: Canonical community id per node.
        auxiliary: Per node, the ids of the auxiliary communities it joins.
        aux_edges: ``(aux_count, 2)`` endpoints of each auxiliary community.
    """

    primary: np.ndarray
    auxiliary: list[list[int]]
    aux_edges: np.ndarray

    @property
    def aux_count(self) -> int:
        return len(self.aux_edges)

    @property
    def membership_count(self) -> np.ndarray:
        return 1 + np.array([len(a) for a in self.auxiliary], dtype=np.int64)


def augment(g: Graph, p: Partition) -> AugmentedMembership:
    check_partition(g, p)
    primary = canonical_assign(p.assign)
    cross = np.flatnonzero(primary[g.src] != primary[g.dst])
    aux_edges = np.column_stack([g.src[cross], g.dst[cross]])
    auxiliary: list[list[int]] = [[] for _ in range(g.node_count)]
    for aux_id, (u, v) in enumerate(aux_edges.tolist()):
        auxiliary[u].append(aux_id)
        auxiliary[v].append(aux_id)
    return AugmentedMembership(primary, auxiliary, aux_edges)


def cross_edge_counts(g: Graph, assign: np.ndarray) -> np.ndarray:
    """Number of incident edges leaving each node's community (unweighted)."""
    cross = assign[g.src] != assign[g.dst]
    n = g.node_count
    return (np.bincount(g.src[cross], minlength=n)
            + np.bincount(g.dst[cross], minlength=n))


def write_partition(p: Partition, path, ids=None) -> None:
    """Write ``node_id community_id`` lines with canonical community ids."""
    assign = canonical_assign(p.assign)
    ids = [str(i) for i in range(len(assign))] if ids is None else ids
    with open(path, "w") as fh:
        for node, c in zip(ids, assign.tolist()):
            fh.write(f"{node} {c}\n")


def read_partition(path, g: Graph | None = None) -> Partition:
    """Read a partition file; node tokens resolve through ``g.id_map`` if given."""
    pairs = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected 2 fields, got {len(parts)}", path, lineno)
            node_tok, comm_tok = parts
            if g is not None and g.id_map is not None:
                if node_tok not in g.id_map:
                    raise ValidationError(f"{path}:{lineno}: unknown node id {node_tok!r}")
                node = g.id_map[node_tok]
            else:
                try:
                    node = int(node_tok)
                except ValueError:
                    raise ParseError(f"bad node id {node_tok!r}", path, lineno) from None
            try:
                pairs[node] = int(comm_tok)
            except ValueError:
                raise ParseError(f"bad community id {comm_tok!r}", path, lineno) from None
    n = g.node_count if g is not None else (max(pairs) + 1 if pairs else 0)
    missing = set(range(n)) - set(pairs)
    if missing or len(pairs) != n:
        raise ValidationError(
            f"{path}: partition must assign every node exactly once "
            f"({len(missing)} missing)")
    assign = np.array([pairs[i] for i in range(n)], dtype=np.int64)
    return Partition(canonical_assign(assign))
