"""Trust (directed edge) prediction driven by communities and their centers.

A pair ``(u, v)`` is described by the rating similarity of the two users,
the similarity of each user to the center of the other's community, and
whether they share a community. Centers are picked by a centrality on
the community's induced subgraph of the training-visible trust graph.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .classify import LogisticRegressionGD, TaskResult, binary_report
from .errors import ValidationError
from .graph import Graph, RatingsTable
from .partition import Partition, canonical_assign, check_partition

logger = logging.getLogger(__name__)

__all__ = [
    "CENTRALITIES",
    "brandes_betweenness",
    "harmonic_closeness",
    "community_center",
    "community_centers",
    "PairFeatures",
    "pair_features",
    "TrustSplit",
    "trust_split",
    "fit_eval_pairs",
    "train_eval_trust",
    "evaluate_pool_trust",
]

CENTRALITIES = ("betweenness", "max_degree", "max_trustor", "max_trustee", "max_closeness", "random")
_ALIASES = {"degree": "max_degree", "trustor": "max_trustor", "trustee": "max_trustee",
            "closeness": "max_closeness"}

MIN_TRUST_EDGES = 10


def _choice(choice: str) -> str:
    choice = _ALIASES.get(choice, choice)
    if choice not in CENTRALITIES:
        raise ValidationError(f"unknown centrality {choice!r}; choose from {CENTRALITIES}")
    return choice


def _bfs(adj, s):
    dist = {s: 0}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def brandes_betweenness(adj: list[list[int]]) -> np.ndarray:
    """Exact unnormalized betweenness of an unweighted undirected graph.

    Args:
        adj: Neighbor lists over local ids ``0..s-1``.

    Returns:
        Betweenness per node; each unordered pair counts once.
    """
    s_count = len(adj)
    bc = np.zeros(s_count)
    for s in range(s_count):
        stack = []
        preds = [[] for _ in range(s_count)]
        sigma = [0] * s_count
        sigma[s] = 1
        dist = [-1] * s_count
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * s_count
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc / 2.0


def harmonic_closeness(adj: list[list[int]]) -> np.ndarray:
    """Sum of inverse shortest-path distances to every reachable node."""
    out = np.zeros(len(adj))
    for s in range(len(adj)):
        out[s] = sum(1.0 / d for d in _bfs(adj, s).values() if d > 0)
    return out


def _induced(g: Graph, members: np.ndarray):
    local = {int(v): i for i, v in enumerate(members.tolist())}
    adj = [[] for _ in members]
    inside = np.isin(g.src, members) & np.isin(g.dst, members)
    for u, v in zip(g.src[inside].tolist(), g.dst[inside].tolist()):
        adj[local[u]].append(local[v])
        adj[local[v]].append(local[u])
    return local, adj


def _scores(g: Graph, members: np.ndarray, choice: str) -> np.ndarray:
    if choice in ("max_trustor", "max_trustee"):
        if g.trust is None:
            raise ValidationError(f"{choice} needs a trust overlay")
        t = g.trust
        t = t[np.isin(t[:, 0], members) & np.isin(t[:, 1], members)]
        col = t[:, 0] if choice == "max_trustor" else t[:, 1]
        counts = np.bincount(col, minlength=g.node_count)
        return counts[members].astype(np.float64)
    _, adj = _induced(g, members)
    if choice == "max_degree":
        return np.array([len(a) for a in adj], dtype=np.float64)
    if choice == "betweenness":
        return brandes_betweenness(adj)
    return harmonic_closeness(adj)


def community_center(g: Graph, p: Partition, c: int, choice: str, seed=None) -> int:
    """Member of community ``c`` with the highest centrality.

    Degree, betweenness and closeness use the community's induced subgraph
    of ``g``; trustor/trustee use out-/in-degree in ``g.trust`` among
    members. Ties go to the smallest node id; ``random`` draws uniformly.
    """
    choice = _choice(choice)
    check_partition(g, p)
    members = np.flatnonzero(canonical_assign(p.assign) == c)
    if len(members) == 0:
        raise ValidationError(f"community {c} is empty")
    if choice == "random":
        return int(members[np.random.default_rng(seed).integers(len(members))])
    scores = _scores(g, members, choice)
    return int(members[np.flatnonzero(scores == scores.max())[0]])


def community_centers(g: Graph, p: Partition, choice: str, seed=None) -> np.ndarray:
    """Center node per canonical community id (random draws one per community)."""
    choice = _choice(choice)
    check_partition(g, p)
    assign = canonical_assign(p.assign)
    k = int(assign.max()) + 1
    order = np.argsort(assign, kind="stable")
    bounds = np.searchsorted(assign[order], np.arange(k + 1))
    rng = np.random.default_rng(seed)
    centers = np.empty(k, dtype=np.int64)
    for c in range(k):
        members = order[bounds[c]:bounds[c + 1]]
        if choice == "random":
            centers[c] = members[rng.integers(len(members))]
        elif len(members) == 1:
            centers[c] = members[0]
        else:
            scores = _scores(g, members, choice)
            centers[c] = members[np.flatnonzero(scores == scores.max())[0]]
    return centers


@dataclass(frozen=True, eq=False)
class PairFeatures:
    sim_uv: np.ndarray
    sim_u_centerv: np.ndarray
    sim_v_centeru: np.ndarray
    same_community: np.ndarray
    unrated_users: int = 0

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.sim_uv, self.sim_u_centerv, self.sim_v_centeru,
                                self.same_community.astype(np.float64)])

    def __len__(self):
        return len(self.sim_uv)


class _Cosine:
    """Cosine similarity between users restricted to their co-rated items."""

    def __init__(self, ratings: RatingsTable, user_count: int):
        from scipy import sparse

        r = ratings.matrix(user_count)
        self.r = r
        self.r2 = r.multiply(r).tocsr()
        self.rated = sparse.csr_matrix(
            (np.ones(len(ratings.users)), (ratings.users, ratings.items)), shape=r.shape)
        self.has_ratings = np.diff(self.rated.indptr) > 0

    def __call__(self, us, vs) -> np.ndarray:
        if len(us) == 0:
            return np.zeros(0)
        dot = np.asarray(self.r[us].multiply(self.r[vs]).sum(axis=1)).ravel()
        nu = np.asarray(self.r2[us].multiply(self.rated[vs]).sum(axis=1)).ravel()
        nv = np.asarray(self.rated[us].multiply(self.r2[vs]).sum(axis=1)).ravel()
        denom = np.sqrt(nu) * np.sqrt(nv)
        out = np.zeros(len(us))
        ok = denom > 0
        out[ok] = dot[ok] / denom[ok]
        return np.clip(out, -1.0, 1.0)


def pair_features(ratings: RatingsTable, p: Partition, centers, pairs, _cosine=None) -> PairFeatures:
    """Features for directed candidate pairs ``(u, v)``.

    Users without ratings have similarity 0 to everyone; how many of the
    pair endpoints are such users is reported in ``unrated_users``.
    """
    assign = canonical_assign(p.assign)
    centers = np.asarray(centers, dtype=np.int64)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    cos = _cosine or _Cosine(ratings, len(assign))
    u, v = pairs[:, 0], pairs[:, 1]
    cu, cv = centers[assign[u]], centers[assign[v]]
    unrated = int(np.sum(~cos.has_ratings[np.unique(pairs)])) if len(pairs) else 0
    if unrated:
        logger.info("%d user(s) in candidate pairs have no ratings", unrated)
    return PairFeatures(
        sim_uv=cos(u, v),
        sim_u_centerv=cos(u, cv),
        sim_v_centeru=cos(v, cu),
        same_community=(assign[u] == assign[v]).astype(np.int64),
        unrated_users=unrated,
    )


@dataclass(frozen=True, eq=False)
class TrustSplit:
    """Held-out trust edges plus disjoint sampled non-edges for train and test."""

    train_pos: np.ndarray
    test_pos: np.ndarray
    train_neg: np.ndarray
    test_neg: np.ndarray

    def train_pairs(self):
        return (np.vstack([self.train_pos, self.train_neg]),
                np.r_[np.ones(len(self.train_pos)), np.zeros(len(self.train_neg))].astype(np.int64))

    def test_pairs(self):
        return (np.vstack([self.test_pos, self.test_neg]),
                np.r_[np.ones(len(self.test_pos)), np.zeros(len(self.test_neg))].astype(np.int64))


def _sample_non_edges(n, linked: set, count, rng) -> np.ndarray:
    available = n * (n - 1) - len(linked)
    if available < count:
        raise ValidationError(
            f"only {available} candidate non-edge pairs for {count} negatives")
    if n * n <= 4_000_000:
        u, v = np.divmod(np.arange(n * n), n)
        keep = u != v
        cand = [(a, b) for a, b in zip(u[keep].tolist(), v[keep].tolist()) if (a, b) not in linked]
        pick = rng.choice(len(cand), size=count, replace=False)
        return np.array([cand[i] for i in pick.tolist()], dtype=np.int64).reshape(-1, 2)
    out, seen = [], set()
    while len(out) < count:
        a, b = rng.integers(n, size=(2, 2 * (count - len(out)) + 16))
        for x, y in zip(a.tolist(), b.tolist()):
            if x != y and (x, y) not in linked and (x, y) not in seen:
                seen.add((x, y))
                out.append((x, y))
                if len(out) == count:
                    break
    return np.array(out, dtype=np.int64)


def trust_split(g: Graph, holdout: float = 0.2, seed=0) -> TrustSplit:
    """Hide a fraction of trust edges and sample as many non-edges per side.

    Negatives are ordered pairs with no trust edge in either direction.
    """
    if g.trust is None or len(g.trust) < MIN_TRUST_EDGES:
        raise ValidationError(f"trust prediction needs at least {MIN_TRUST_EDGES} trust edges")
    if not 0 < holdout < 1:
        raise ValidationError("holdout must be in (0, 1)")
    rng = np.random.default_rng(seed)
    t = g.trust
    perm = rng.permutation(len(t))
    n_test = max(1, int(round(holdout * len(t))))
    test_pos, train_pos = t[perm[:n_test]], t[perm[n_test:]]
    linked = {(a, b) for a, b in t.tolist()} | {(b, a) for a, b in t.tolist()}
    neg = _sample_non_edges(g.node_count, linked, len(t), rng)
    return TrustSplit(train_pos, test_pos, neg[n_test:], neg[:n_test])


def fit_eval_pairs(x_train, y_train, x_test, y_test) -> TaskResult:
    """Fit the gradient-descent logistic model and score the test pairs."""
    model = LogisticRegressionGD(learning_rate=0.1, epochs=500).fit(x_train, y_train)
    return binary_report(y_test, model.predict(x_test), model.predict_proba(x_test))


def train_eval_trust(g: Graph, ratings: RatingsTable, p: Partition, choice: str = "max_degree",
                     holdout: float = 0.2, seed=0, split: TrustSplit | None = None,
                     _cosine=None) -> TaskResult:
    """Trust prediction quality of partition ``p`` under one centrality.

    The partition is taken as given. Community centers are computed on
    the training trust edges only, so held-out edges never inform them.
    """
    choice = _choice(choice)
    check_partition(g, p)
    split = split or trust_split(g, holdout, seed)
    visible = Graph.from_edges(g.node_count, split.train_pos, trust=split.train_pos)
    centers = community_centers(visible, p, choice, seed)
    cos = _cosine or _Cosine(ratings, g.node_count)
    train_pairs, y_train = split.train_pairs()
    test_pairs, y_test = split.test_pairs()
    x_train = pair_features(ratings, p, centers, train_pairs, cos).matrix()
    x_test = pair_features(ratings, p, centers, test_pairs, cos).matrix()
    return fit_eval_pairs(x_train, y_train, x_test, y_test)


def evaluate_pool_trust(records, g: Graph, ratings: RatingsTable, choice: str = "max_degree",
                        holdout: float = 0.2, seed=0):
    """Run :func:`train_eval_trust` on every archived partition with one fixed split.

    Returns:
        List of ``(solution_id, TaskResult | None, error_message)``.
    """
    split = trust_split(g, holdout, seed)
    cos = _Cosine(ratings, g.node_count)
    out = []
    for rec in records:
        try:
            res = train_eval_trust(g, ratings, rec.partition, choice, holdout, seed, split, cos)
            out.append((rec.id, res, ""))
        except Exception as exc:  # recorded per solution, run continues
            logger.warning("solution %s failed: %s", rec.id, exc)
            out.append((rec.id, None, f"{type(exc).__name__}: {exc}"))
    return out
