"""Partition quality measures and the 11-column property vector.

All functions take a graph and a partition (or a raw assignment array) and
are pure. Weighted quantities (modularity, cut, volume, conductance) use
edge weights; shape quantities (density, clustering, centralization) count
edges, so they stay in ``[0, 1]`` and ignore weight scaling.
"""

from __future__ import annotations

import logging
from dataclasses import astuple, dataclass, fields
from typing import NamedTuple

import numpy as np

from .errors import EmptyGraphError, ValidationError
from .graph import Graph
from .partition import Partition, canonical_assign, check_partition

logger = logging.getLogger(__name__)

__all__ = [
    "PROPERTY_NAMES",
    "PropertyVector",
    "CommunityStats",
    "modularity",
    "community_stats",
    "property_vector",
    "local_clustering",
    "correlation_matrix",
    "fitness_value",
]


@dataclass(frozen=True)
class PropertyVector:
    modularity: float
    num_communities: int
    avg_clustering_coefficient: float
    avg_density: float
    avg_cut_size: float
    avg_conductance: float
    avg_centralization: float
    top3_avg_density: float
    top3_avg_conductance: float
    top3_avg_size: float
    top3_avg_cut_size: float

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> PropertyVector:
        values = list(values)
        if len(values) != len(PROPERTY_NAMES):
            raise ValidationError(f"expected {len(PROPERTY_NAMES)} values, got {len(values)}")
        out = [float(v) for v in values]
        out[1] = int(round(out[1]))
        return cls(*out)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(PROPERTY_NAMES, astuple(self)))


PROPERTY_NAMES: tuple[str, ...] = tuple(f.name for f in fields(PropertyVector))


@dataclass(frozen=True, eq=False)
class CommunityStats:
    """Per-community arrays, indexed by canonical community id."""

    size: np.ndarray
    internal_edges: np.ndarray        # weighted l_c
    internal_edge_count: np.ndarray   # unweighted l_c
    total_degree: np.ndarray          # weighted d_c (volume)
    cut_size: np.ndarray              # weighted
    density: np.ndarray
    conductance: np.ndarray
    centralization: np.ndarray
    avg_local_clustering: np.ndarray

    @property
    def k(self) -> int:
        return len(self.size)


def _assign_of(g: Graph, p) -> np.ndarray:
    if isinstance(p, Partition):
        check_partition(g, p)
        return canonical_assign(p.assign)
    assign = np.asarray(p, dtype=np.int64)
    if len(assign) != g.node_count:
        raise ValidationError(f"assignment covers {len(assign)} nodes, graph has {g.node_count}")
    return canonical_assign(assign)


def _internal(g, assign):
    return assign[g.src] == assign[g.dst]


def _modularity(g, assign, k, internal, resolution=1.0):
    m = g.total_weight
    if m <= 0:
        raise EmptyGraphError("modularity is undefined on a graph without edge weight")
    l_w = np.bincount(assign[g.src][internal], weights=g.weight[internal], minlength=k)
    d = np.bincount(assign, weights=g.strength, minlength=k)
    return float(np.sum(l_w / m - resolution * (d / (2.0 * m)) ** 2))


def modularity(g: Graph, p, resolution: float = 1.0) -> float:
    """Newman modularity ``sum_c l_c/m - (d_c/2m)^2`` of a partition.

    Raises:
        EmptyGraphError: if the graph has no edges.
    """
    assign = _assign_of(g, p)
    k = int(assign.max()) + 1 if len(assign) else 0
    return _modularity(g, assign, k, _internal(g, assign), resolution)


def _induced_degree(g, internal):
    n = g.node_count
    return (np.bincount(g.src[internal], minlength=n)
            + np.bincount(g.dst[internal], minlength=n))


def _triangle_counts(g, assign=None):
    tri = g.triangles
    n = g.node_count
    if len(tri) == 0:
        return np.zeros(n, dtype=np.int64)
    if assign is not None:
        ta = assign[tri]
        tri = tri[(ta[:, 0] == ta[:, 1]) & (ta[:, 1] == ta[:, 2])]
    return np.bincount(tri.ravel(), minlength=n)


def _clustering_from(deg, tri):
    denom = deg * (deg - 1)
    out = np.zeros(len(deg))
    ok = deg >= 2
    out[ok] = 2.0 * tri[ok] / denom[ok]
    return out


def local_clustering(g: Graph, p=None) -> np.ndarray:
    """Unweighted local clustering coefficient per node.

    With a partition, each node's coefficient is taken in the subgraph
    induced by its own community. Nodes of degree < 2 get 0.
    """
    if p is None:
        return _clustering_from(g.degree, _triangle_counts(g))
    assign = _assign_of(g, p)
    return _clustering_from(_induced_degree(g, _internal(g, assign)), _triangle_counts(g, assign))


def _cut(g, assign, k, internal):
    cross = ~internal
    w = g.weight[cross]
    return (np.bincount(assign[g.src][cross], weights=w, minlength=k)
            + np.bincount(assign[g.dst][cross], weights=w, minlength=k))


def _density(size, l_n):
    out = np.zeros(len(size))
    ok = size >= 2
    out[ok] = 2.0 * l_n[ok] / (size[ok] * (size[ok] - 1.0))
    return out


def _conductance(g, assign, k, cut):
    vol = np.bincount(assign, weights=g.strength, minlength=k)
    other = g.strength.sum() - vol
    low = np.minimum(vol, other)
    out = np.zeros(k)
    ok = low > 0
    out[ok] = cut[ok] / low[ok]
    return out, vol


def _centralization(assign, k, size, deg_in):
    dmax = np.zeros(k, dtype=np.int64)
    np.maximum.at(dmax, assign, deg_in)
    total = np.bincount(assign, weights=deg_in, minlength=k)
    out = np.zeros(k)
    ok = size >= 3
    s = size[ok].astype(np.float64)
    out[ok] = (s * dmax[ok] - total[ok]) / ((s - 1.0) * (s - 2.0))
    return out


def _stats(g, assign):
    k = int(assign.max()) + 1 if len(assign) else 0
    internal = _internal(g, assign)
    size = np.bincount(assign, minlength=k)
    ca = assign[g.src][internal]
    l_w = np.bincount(ca, weights=g.weight[internal], minlength=k)
    l_n = np.bincount(ca, minlength=k)
    cut = _cut(g, assign, k, internal)
    cond, vol = _conductance(g, assign, k, cut)
    deg_in = _induced_degree(g, internal)
    cc = _clustering_from(deg_in, _triangle_counts(g, assign))
    return CommunityStats(
        size=size,
        internal_edges=l_w,
        internal_edge_count=l_n,
        total_degree=vol,
        cut_size=cut,
        density=_density(size, l_n),
        conductance=cond,
        centralization=_centralization(assign, k, size, deg_in),
        avg_local_clustering=np.bincount(assign, weights=cc, minlength=k) / np.maximum(size, 1),
    ), internal


def community_stats(g: Graph, p) -> CommunityStats:
    """Size, edge, cut, density, conductance, centralization and clustering per community.

    Density is ``2 l / (n (n-1))`` over the unweighted internal edge count
    (0 for singletons). Conductance is ``cut / min(vol, 2m - vol)`` and is 0
    when that minimum is 0. Centralization is Freeman degree
    centralization of the induced subgraph (0 below 3 members).
    """
    return _stats(g, _assign_of(g, p))[0]


def _top3(size):
    order = np.lexsort((np.arange(len(size)), -size))
    return order[:3]


def property_vector(g: Graph, p) -> PropertyVector:
    """The 11 structural properties of one partition."""
    assign = _assign_of(g, p)
    st, internal = _stats(g, assign)
    k = st.k
    top = _top3(st.size)
    return PropertyVector(
        modularity=_modularity(g, assign, k, internal),
        num_communities=int(k),
        avg_clustering_coefficient=float(st.avg_local_clustering.mean()),
        avg_density=float(st.density.mean()),
        avg_cut_size=float(st.cut_size.mean()),
        avg_conductance=float(st.conductance.mean()),
        avg_centralization=float(st.centralization.mean()),
        top3_avg_density=float(st.density[top].mean()),
        top3_avg_conductance=float(st.conductance[top].mean()),
        top3_avg_size=float(st.size[top].mean()),
        top3_avg_cut_size=float(st.cut_size[top].mean()),
    )


FITNESS_TAGS = ("modularity", "avg_density", "avg_clustering_coefficient", "neg_avg_conductance")


def fitness_value(g: Graph, assign: np.ndarray, tag: str) -> float:
    """Evaluate one GA fitness on a canonical assignment array.

    Skips the canonicalization and the unused statistics, since this sits
    inside the GA's inner loop.
    """
    k = int(assign.max()) + 1
    internal = _internal(g, assign)
    if tag == "modularity":
        return _modularity(g, assign, k, internal)
    if tag == "avg_density":
        size = np.bincount(assign, minlength=k)
        l_n = np.bincount(assign[g.src][internal], minlength=k)
        return float(_density(size, l_n).mean())
    if tag == "avg_clustering_coefficient":
        size = np.bincount(assign, minlength=k)
        cc = _clustering_from(_induced_degree(g, internal), _triangle_counts(g, assign))
        return float((np.bincount(assign, weights=cc, minlength=k) / size).mean())
    if tag == "neg_avg_conductance":
        cond, _ = _conductance(g, assign, k, _cut(g, assign, k, internal))
        return -float(cond.mean())
    raise ValueError(f"unknown fitness tag {tag!r}")


class Correlation(NamedTuple):
    matrix: np.ndarray
    constant: np.ndarray  # bool per column


def correlation_matrix(rows) -> Correlation:
    """Pearson correlation between property columns.

    Args:
        rows: Sequence of :class:`PropertyVector` or a 2-D array.

    Returns:
        ``Correlation(matrix, constant)``. A constant column correlates 0
        with everything, itself included, and is flagged in ``constant``.
    """
    if len(rows) and isinstance(rows[0], PropertyVector):
        x = np.array([r.to_array() for r in rows])
    else:
        x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValidationError("correlation needs at least 2 rows")
    centered = x - x.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    constant = np.ptp(x, axis=0) == 0
    if constant.any():
        logger.warning("constant column(s) %s; correlations set to 0",
                       np.flatnonzero(constant).tolist())
    safe = np.where(constant, 1.0, norms)
    z = centered / safe
    corr = z.T @ z
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    diag = np.where(constant, 0.0, 1.0)
    np.fill_diagonal(corr, diag)
    return Correlation(corr, constant)
