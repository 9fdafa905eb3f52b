"""Undirected weighted graphs, plus the text loaders that build them."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "Graph",
    "NodeLabels",
    "RatingsTable",
    "load_edge_list",
    "write_edge_list",
    "load_labels",
    "load_trust",
    "load_ratings",
    "write_labels",
    "write_trust",
    "write_ratings",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with dense integer node ids.

    Edges are stored once, oriented ``src < dst`` and sorted. Use
    :meth:`from_edges` rather than the constructor: it drops self-loops and
    merges parallel edges by summing their weights.

    Attributes:
        node_count: Number of nodes; ids are ``0..node_count-1``.
        src, dst: Edge endpoints, ``src[i] < dst[i]``.
        weight: Nonnegative edge weights.
        trust: Optional ``(t, 2)`` array of directed ``(truster, trustee)``
            pairs living on the same node ids.
        id_map: Original id token -> dense id, kept for reporting.
    """

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    trust: np.ndarray | None = None
    id_map: dict[str, int] | None = field(default=None, repr=False)

    def __repr__(self):
        trust = "" if self.trust is None else f", trust_edges={len(self.trust)}"
        return f"Graph(nodes={self.node_count}, edges={len(self.src)}{trust})"

    @classmethod
    def from_edges(cls, node_count, edges, weights=None, *, trust=None, id_map=None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(len(edges))
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(weights) != len(edges):
            raise ValidationError("edges and weights differ in length")
        if len(edges) and (edges.min() < 0 or edges.max() >= node_count):
            raise ValidationError("edge endpoint outside 0..node_count-1")
        if np.any(weights < 0):
            raise ValidationError("negative edge weight")
        loops = edges[:, 0] == edges[:, 1]
        if loops.any():
            logger.warning("dropping %d self-loop(s)", int(loops.sum()))
            edges, weights = edges[~loops], weights[~loops]
        u = np.minimum(edges[:, 0], edges[:, 1])
        v = np.maximum(edges[:, 0], edges[:, 1])
        key = u * node_count + v
        uniq, inverse = np.unique(key, return_inverse=True)
        merged = np.bincount(inverse, weights=weights, minlength=len(uniq))
        if trust is not None:
            trust = _clean_trust(np.asarray(trust, dtype=np.int64).reshape(-1, 2), node_count)
        return cls(
            node_count=int(node_count),
            src=(uniq // node_count).astype(np.int64) if node_count else uniq,
            dst=(uniq % node_count).astype(np.int64) if node_count else uniq,
            weight=merged.astype(np.float64),
            trust=trust,
            id_map=id_map,
        )

    def with_trust(self, trust) -> Graph:
        """Copy of the graph carrying a directed trust overlay."""
        trust = _clean_trust(np.asarray(trust, dtype=np.int64).reshape(-1, 2), self.node_count)
        return replace(self, trust=trust)

    @property
    def edge_count(self) -> int:
        return len(self.src)

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    @property
    def is_weighted(self) -> bool:
        return bool(np.any(self.weight != 1.0))

    @property
    def edges(self) -> np.ndarray:
        return np.column_stack([self.src, self.dst])

    @cached_property
    def _csr(self):
        n = self.node_count
        heads = np.concatenate([self.src, self.dst])
        tails = np.concatenate([self.dst, self.src])
        w = np.concatenate([self.weight, self.weight])
        order = np.lexsort((tails, heads))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
        return indptr, tails[order], w[order]

    @property
    def indptr(self) -> np.ndarray:
        return self._csr[0]

    @property
    def indices(self) -> np.ndarray:
        return self._csr[1]

    @property
    def adj_weight(self) -> np.ndarray:
        return self._csr[2]

    def neighbors(self, node: int) -> np.ndarray:
        indptr, indices, _ = self._csr
        return indices[indptr[node]:indptr[node + 1]]

    def neighbor_weights(self, node: int) -> np.ndarray:
        indptr, _, w = self._csr
        return w[indptr[node]:indptr[node + 1]]

    @cached_property
    def degree(self) -> np.ndarray:
        """Neighbor count per node."""
        return np.diff(self.indptr)

    @cached_property
    def strength(self) -> np.ndarray:
        """Sum of incident edge weights per node."""
        n = self.node_count
        return (np.bincount(self.src, weights=self.weight, minlength=n)
                + np.bincount(self.dst, weights=self.weight, minlength=n))

    @cached_property
    def neighbor_lists(self) -> list[list[int]]:
        indptr, indices = self.indptr.tolist(), self.indices.tolist()
        return [indices[indptr[i]:indptr[i + 1]] for i in range(self.node_count)]

    @cached_property
    def neighbor_sets(self) -> list[set[int]]:
        return [set(self.neighbors(i).tolist()) for i in range(self.node_count)]

    @cached_property
    def triangles(self) -> np.ndarray:
        """All triangles as a ``(t, 3)`` array with ``a < b < c`` per row."""
        nbrs = self.neighbor_sets
        out = []
        for a, b in zip(self.src.tolist(), self.dst.tolist()):
            for c in nbrs[a] & nbrs[b]:
                if c > b:
                    out.append((a, b, c))
        if not out:
            return np.zeros((0, 3), dtype=np.int64)
        return np.asarray(sorted(out), dtype=np.int64)

    def original_ids(self) -> list[str]:
        """Original id token per dense id (dense ids as strings when unknown)."""
        if self.id_map is None:
            return [str(i) for i in range(self.node_count)]
        out = [""] * self.node_count
        for tok, i in self.id_map.items():
            out[i] = tok
        return out

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        same_trust = (self.trust is None and other.trust is None) or (
            self.trust is not None and other.trust is not None
            and np.array_equal(self.trust, other.trust))
        return (self.node_count == other.node_count
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and np.array_equal(self.weight, other.weight)
                and same_trust)

    __hash__ = None


def _clean_trust(trust, node_count):
    if len(trust) and (trust.min() < 0 or trust.max() >= node_count):
        raise ValidationError("trust edge endpoint outside the graph")
    trust = trust[trust[:, 0] != trust[:, 1]]
    if len(trust) == 0:
        return trust
    return np.unique(trust, axis=0)


@dataclass(frozen=True, eq=False)
class NodeLabels:
    """Binary node classes (0 normal, 1 anomaly) and how many were defaulted."""

    labels: np.ndarray
    defaulted: int = 0

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class RatingsTable:
    """User-item ratings; ``users`` are dense graph node ids."""

    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    item_ids: list[str] = field(default_factory=list, repr=False)

    @property
    def item_count(self) -> int:
        if self.item_ids:
            return len(self.item_ids)
        return int(self.items.max()) + 1 if len(self.items) else 0

    def matrix(self, user_count: int):
        """Sparse ``user_count x item_count`` CSR rating matrix."""
        from scipy import sparse

        return sparse.csr_matrix(
            (self.ratings, (self.users, self.items)),
            shape=(user_count, self.item_count))


def _sort_tokens(tokens):
    try:
        return sorted(tokens, key=int)
    except ValueError:
        return sorted(tokens)


def _edge_rows(path, fmt):
    with open(path, newline="") as fh:
        if fmt == "csv":
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                    continue
                yield lineno, [tok.strip() for tok in row]
        elif fmt == "whitespace":
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                yield lineno, line.split()
        else:
            raise ValueError(f"unknown edge list format {fmt!r}")


_HEADER_TOKENS = {"u", "v", "w", "src", "dst", "source", "target", "weight"}


def load_edge_list(path, fmt="whitespace") -> Graph:
    """Read an edge list of ``u v [w]`` lines into a :class:`Graph`.

    Node tokens are relabeled densely in sorted order (numeric order when
    every token is an integer) so that writing and reloading is the
    identity. ``#`` lines are comments. A self-loop line still registers its
    node, which is how isolated nodes are represented.
    """
    raw = []
    tokens = {}
    for lineno, parts in _edge_rows(path, fmt):
        if lineno == 1 and fmt == "csv" and {p.lower() for p in parts} <= _HEADER_TOKENS:
            continue
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 2 or 3 fields, got {len(parts)}", path, lineno)
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError(f"bad weight {parts[2]!r}", path, lineno) from None
            if not np.isfinite(w):
                raise ParseError(f"non-finite weight {parts[2]!r}", path, lineno)
            if w < 0:
                raise ValidationError(f"{path}:{lineno}: negative weight {w}")
        raw.append((parts[0], parts[1], w))
        tokens.setdefault(parts[0], None)
        tokens.setdefault(parts[1], None)
    id_map = {tok: i for i, tok in enumerate(_sort_tokens(tokens))}
    edges = np.array([(id_map[a], id_map[b]) for a, b, _ in raw], dtype=np.int64).reshape(-1, 2)
    weights = np.array([w for _, _, w in raw], dtype=np.float64)
    return Graph.from_edges(len(id_map), edges, weights, id_map=id_map)


def write_edge_list(g: Graph, path) -> None:
    """Write ``g`` with dense ids; isolated nodes appear as ``i i`` lines."""
    isolated = np.flatnonzero(g.degree == 0)
    with open(path, "w") as fh:
        fh.write(f"# nodes {g.node_count} edges {g.edge_count}\n")
        for i in isolated.tolist():
            fh.write(f"{i} {i}\n")
        for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()):
            fh.write(f"{u} {v} {w!r}\n")


def _resolve(g: Graph, token: str, path, lineno) -> int:
    if g.id_map is not None:
        if token in g.id_map:
            return g.id_map[token]
    else:
        try:
            i = int(token)
        except ValueError:
            i = -1
        if 0 <= i < g.node_count:
            return i
    raise ValidationError(f"{path}:{lineno}: unknown node id {token!r}")


def load_labels(path, g: Graph) -> NodeLabels:
    """Read ``node label`` lines; unlisted nodes default to class 0."""
    labels = np.zeros(g.node_count, dtype=np.int64)
    seen = np.zeros(g.node_count, dtype=bool)
    for lineno, parts in _edge_rows(path, "whitespace"):
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, got {len(parts)}", path, lineno)
        node = _resolve(g, parts[0], path, lineno)
        try:
            value = int(parts[1])
        except ValueError:
            raise ParseError(f"bad label {parts[1]!r}", path, lineno) from None
        if value not in (0, 1):
            raise ValidationError(f"{path}:{lineno}: label {value} not in {{0, 1}}")
        labels[node] = value
        seen[node] = True
    defaulted = int((~seen).sum())
    if defaulted:
        logger.info("%d node(s) without a label defaulted to 0", defaulted)
    return NodeLabels(labels=labels, defaulted=defaulted)


def load_trust(path, g: Graph) -> Graph:
    """Attach the directed ``truster trustee`` pairs in ``path`` to ``g``."""
    pairs = []
    for lineno, parts in _edge_rows(path, "whitespace"):
        if len(parts) < 2:
            raise ParseError(f"expected at least 2 fields, got {len(parts)}", path, lineno)
        pairs.append((_resolve(g, parts[0], path, lineno), _resolve(g, parts[1], path, lineno)))
    return g.with_trust(np.array(pairs, dtype=np.int64).reshape(-1, 2))


def load_ratings(path, g: Graph) -> RatingsTable:
    """Read a ``user,item,rating`` CSV with header.

    Users missing from the graph are skipped (count logged). Repeated
    ``(user, item)`` pairs keep the last rating.
    """
    cells = {}
    item_index: dict[str, int] = {}
    skipped = duplicates = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return RatingsTable(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
        for lineno, row in enumerate(reader, start=2):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", path, lineno)
            user_tok, item_tok, rating_tok = (c.strip() for c in row[:3])
            try:
                rating = float(rating_tok)
            except ValueError:
                raise ParseError(f"bad rating {rating_tok!r}", path, lineno) from None
            try:
                user = _resolve(g, user_tok, path, lineno)
            except ValidationError:
                skipped += 1
                continue
            item = item_index.setdefault(item_tok, len(item_index))
            if (user, item) in cells:
                duplicates += 1
            cells[(user, item)] = rating
    if skipped:
        logger.warning("skipped %d rating(s) from users not in the graph", skipped)
    if duplicates:
        logger.warning("%d duplicate (user, item) rating(s); kept the last", duplicates)
    keys = sorted(cells)
    users = np.array([k[0] for k in keys], dtype=np.int64)
    items = np.array([k[1] for k in keys], dtype=np.int64)
    ratings = np.array([cells[k] for k in keys], dtype=np.float64)
    item_ids = [""] * len(item_index)
    for tok, i in item_index.items():
        item_ids[i] = tok
    return RatingsTable(users, items, ratings, item_ids)


def write_labels(labels, path) -> None:
    """Write ``node label`` lines with dense node ids."""
    values = labels.labels if isinstance(labels, NodeLabels) else np.asarray(labels)
    with open(path, "w") as fh:
        for i, y in enumerate(values.tolist()):
            fh.write(f"{i} {int(y)}\n")


def write_trust(g: Graph, path) -> None:
    """Write the trust overlay of ``g`` as ``truster trustee`` lines."""
    if g.trust is None:
        raise ValidationError("graph has no trust overlay")
    with open(path, "w") as fh:
        for u, v in g.trust.tolist():
            fh.write(f"{u} {v}\n")


def write_ratings(ratings: RatingsTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "item", "rating"])
        for u, i, r in zip(ratings.users.tolist(), ratings.items.tolist(), ratings.ratings.tolist()):
            w.writerow([u, ratings.item_ids[i] if ratings.item_ids else i, repr(float(r))])
