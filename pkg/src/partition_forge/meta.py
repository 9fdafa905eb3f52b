"""Predict a partition's downstream score from its structural properties.

A least-squares gradient-boosted tree ensemble maps the 11 property
columns to a task metric. :func:`active_fit` trains it from a small,
actively chosen sample of a pool: a uniform seed sample, then repeated
batches of the solutions on which a bagged committee disagrees most.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .metrics import PROPERTY_NAMES

logger = logging.getLogger(__name__)

__all__ = [
    "MetaModel",
    "SampleBudget",
    "Pool",
    "ActiveFit",
    "fit_gbrt",
    "active_fit",
    "rank_solutions",
    "transfer_eval",
    "rmse",
]

# Smallest squared-error reduction that justifies a split.
_MIN_SPLIT_GAIN = 1e-12


@dataclass
class _Tree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(len(x), dtype=np.int64)
        rows = np.arange(len(x))
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.value[node]
            go_left = np.zeros(len(x), dtype=bool)
            go_left[inner] = x[rows[inner], f[inner]] <= self.threshold[node[inner]]
            node = np.where(inner, np.where(go_left, self.left[node], self.right[node]), node)

    @property
    def n_splits(self) -> int:
        return int(np.sum(self.feature >= 0))

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["feature"], dtype=np.int64), np.array(d["threshold"], dtype=np.float64),
                   np.array(d["left"], dtype=np.int64), np.array(d["right"], dtype=np.int64),
                   np.array(d["value"], dtype=np.float64))


def _grow_tree(x, orders, resid, max_depth, min_leaf) -> _Tree:
    n, n_feat = x.shape
    feature, threshold, left, right, value = [], [], [], [], []

    def grow(mask, depth):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        count = int(mask.sum())
        total = float(resid[mask].sum())
        value.append(total / count)
        if depth >= max_depth or count < 2 * min_leaf:
            return node
        # per-feature sorted member rows, shape (count, n_feat)
        sel = mask[orders]
        rows = orders.T[sel.T].reshape(n_feat, count).T
        xs = x[rows, np.arange(n_feat)]
        csum = np.cumsum(resid[rows], axis=0)
        i = np.arange(min_leaf, count - min_leaf + 1)
        if len(i) == 0:
            return node
        s_left = csum[i - 1]
        gain = (s_left ** 2 / i[:, None]
                + (total - s_left) ** 2 / (count - i)[:, None]
                - total ** 2 / count)
        gain[~(xs[i - 1] < xs[i])] = -np.inf
        flat = int(np.argmax(gain.T))  # feature-major: first feature wins ties
        f, pos = divmod(flat, len(i))
        if not gain[pos, f] > _MIN_SPLIT_GAIN:
            return node
        lo, hi = xs[i[pos] - 1, f], xs[i[pos], f]
        thr = lo + (hi - lo) / 2.0
        if not lo <= thr < hi:
            thr = lo
        goes_left = mask & (x[:, f] <= thr)
        feature[node] = f
        threshold[node] = float(thr)
        left[node] = grow(goes_left, depth + 1)
        right[node] = grow(mask & ~goes_left, depth + 1)
        return node

    grow(np.ones(n, dtype=bool), 0)
    return _Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                 np.array(left, dtype=np.int64), np.array(right, dtype=np.int64), np.array(value))


@dataclass(eq=False)
class MetaModel:
    """Boosted regression trees over the canonical property columns."""

    base_score: float
    trees: list[_Tree]
    learning_rate: float = 0.1
    max_depth: int = 4
    min_samples_leaf: int = 5
    n_trees: int = 200
    feature_names: tuple[str, ...] = PROPERTY_NAMES
    target_name: str = "f1"
    train_loss: list[float] = field(default_factory=list)

    def predict(self, x) -> np.ndarray:
        x = _as_matrix(x, self.feature_names)
        out = np.full(len(x), self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.apply(x)
        return out

    def to_json(self) -> str:
        return json.dumps({
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "n_trees": self.n_trees,
            "feature_names": list(self.feature_names),
            "target_name": self.target_name,
            "train_loss": self.train_loss,
            "trees": [t.to_dict() for t in self.trees],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> MetaModel:
        d = json.loads(text)
        return cls(
            base_score=float(d["base_score"]),
            trees=[_Tree.from_dict(t) for t in d["trees"]],
            learning_rate=float(d["learning_rate"]),
            max_depth=int(d["max_depth"]),
            min_samples_leaf=int(d["min_samples_leaf"]),
            n_trees=int(d["n_trees"]),
            feature_names=tuple(d["feature_names"]),
            target_name=d["target_name"],
            train_loss=list(d.get("train_loss", [])),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> MetaModel:
        with open(path) as fh:
            return cls.from_json(fh.read())


def _as_matrix(x, names=PROPERTY_NAMES) -> np.ndarray:
    if len(x) and hasattr(x[0], "to_array"):
        x = np.array([row.to_array() for row in x])
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(names):
        raise ValidationError(f"expected an (n, {len(names)}) feature matrix, got {x.shape}")
    return x


def fit_gbrt(x, y, n_trees: int = 200, max_depth: int = 4, learning_rate: float = 0.1,
             min_samples_leaf: int = 5, target_name: str = "f1",
             feature_names=PROPERTY_NAMES) -> MetaModel:
    """Least-squares gradient boosting with depth-bounded regression trees.

    Each round fits a tree to the current residuals and adds it scaled by
    ``learning_rate``. Boosting stops early once no split reduces the
    residual error, so a constant target yields the base score alone.
    Rows are put in a canonical order first, which makes the fit
    independent of how the caller ordered them.

    Args:
        x: ``(n, 11)`` property matrix or a sequence of PropertyVectors.
        y: Target per row.
    """
    x = _as_matrix(x, feature_names)
    y = np.asarray(y, dtype=np.float64)
    if len(y) != len(x):
        raise ValidationError("features and targets differ in length")
    if len(y) < 2 * min_samples_leaf:
        raise ValidationError(f"need at least {2 * min_samples_leaf} rows, got {len(y)}")
    canon = np.lexsort(np.column_stack([x, y]).T[::-1])
    x, y = x[canon], y[canon]
    orders = np.argsort(x, axis=0, kind="stable")
    base = float(y[0]) if np.all(y == y[0]) else float(y.mean())
    pred = np.full(len(y), base)
    trees = []
    loss = [float(np.mean((y - pred) ** 2))]
    for _ in range(n_trees):
        tree = _grow_tree(x, orders, y - pred, max_depth, min_samples_leaf)
        if tree.n_splits == 0:
            break
        pred = pred + learning_rate * tree.apply(x)
        trees.append(tree)
        loss.append(float(np.mean((y - pred) ** 2)))
    return MetaModel(base, trees, learning_rate, max_depth, min_samples_leaf, n_trees,
                     tuple(feature_names), target_name, loss)


@dataclass(frozen=True)
class SampleBudget:
    seed_size: int = 32
    batch: int = 16
    max_fraction: float = 0.05
    bag_count: int = 10

    def limit(self, pool_size: int) -> int:
        return int(math.floor(self.max_fraction * pool_size + 1e-9))


@dataclass(eq=False)
class Pool:
    """Solution ids with their property rows."""

    ids: np.ndarray
    features: np.ndarray
    feature_names: tuple[str, ...] = PROPERTY_NAMES

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.features = _as_matrix(self.features, self.feature_names)
        if len(self.ids) != len(self.features):
            raise ValidationError("ids and features differ in length")

    def __len__(self):
        return len(self.ids)

    @classmethod
    def from_records(cls, records, g=None) -> Pool:
        rows = [r.ensure_properties(g) if g is not None else r.properties for r in records]
        if any(r is None for r in rows):
            raise ValidationError("records lack properties; pass the graph")
        return cls(np.array([r.id for r in records]), np.array([r.to_array() for r in rows]))

    @classmethod
    def from_properties_csv(cls, path) -> Pool:
        from .tables import read_properties_csv

        rows = read_properties_csv(path)
        return cls(np.array([sid for sid, _, _ in rows]), np.array([pv.to_array() for _, _, pv in rows]))

    def subset(self, positions) -> Pool:
        return Pool(self.ids[positions], self.features[positions], self.feature_names)


@dataclass(eq=False)
class ActiveFit:
    model: MetaModel
    sampled_ids: list[int]
    rmse_holdout: float
    holdout_ids: list[int]
    targets: dict[int, float]


def _query(oracle):
    if isinstance(oracle, Mapping):
        return lambda i: float(oracle[i])
    return lambda i: float(oracle(i))


def rmse(pred, truth) -> float:
    pred, truth = np.asarray(pred, dtype=np.float64), np.asarray(truth, dtype=np.float64)
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def active_fit(pool: Pool, oracle, budget: SampleBudget | None = None, seed=0,
               holdout_frac: float = 0.2, **gbrt_params) -> ActiveFit:
    """Fit a :class:`MetaModel` while querying the oracle for few solutions.

    A fixed ``holdout_frac`` of the pool is set aside for measuring error
    and never trained on. From the rest, ``seed_size`` ids are drawn
    uniformly; then, until ``max_fraction`` of the pool has been queried,
    ``bag_count`` bootstrap models are trained and the ``batch`` unqueried
    ids with the highest prediction variance are queried next.

    Args:
        pool: Candidate solutions.
        oracle: ``id -> target`` callable or mapping (runs the downstream task).
        budget: Sampling limits.
        seed: RNG seed for the holdout, seed sample and bootstraps.

    Returns:
        The final model, the queried ids in query order, and the RMSE on
        the holdout.
    """
    budget = budget or SampleBudget()
    query = _query(oracle)
    n = len(pool)
    if n < budget.seed_size + budget.batch:
        raise ValidationError(f"pool of {n} is smaller than seed_size + batch")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_hold = int(round(holdout_frac * n))
    hold_pos, cand_pos = perm[:n_hold], np.sort(perm[n_hold:])
    limit = min(budget.limit(n), len(cand_pos))
    min_rows = 2 * gbrt_params.get("min_samples_leaf", 5)

    targets: dict[int, float] = {}
    queried: list[int] = []  # positions, in query order

    def ask(positions):
        for pos in positions:
            queried.append(int(pos))
            sid = int(pool.ids[pos])
            try:
                targets[sid] = query(sid)
            except Exception as exc:
                logger.warning("oracle failed on solution %s: %s", sid, exc)

    ask(rng.choice(cand_pos, size=min(budget.seed_size, limit), replace=False).tolist())
    while len(queried) < limit:
        known = [q for q in queried if int(pool.ids[q]) in targets]
        open_pos = np.setdiff1d(cand_pos, queried)
        if len(open_pos) == 0:
            break
        take = min(budget.batch, limit - len(queried))
        if len(known) < min_rows:
            ask(rng.choice(open_pos, size=take, replace=False).tolist())
            continue
        x_known = pool.features[known]
        y_known = np.array([targets[int(pool.ids[q])] for q in known])
        preds = []
        for _ in range(budget.bag_count):
            boot = rng.integers(len(known), size=len(known))
            preds.append(fit_gbrt(x_known[boot], y_known[boot], **gbrt_params)
                         .predict(pool.features[open_pos]))
        spread = np.var(np.array(preds), axis=0)
        ask(open_pos[np.argsort(-spread, kind="stable")[:take]].tolist())

    known = [q for q in queried if int(pool.ids[q]) in targets]
    if len(known) < min_rows:
        raise ValidationError(f"only {len(known)} successful oracle queries; need {min_rows}")
    model = fit_gbrt(pool.features[known], [targets[int(pool.ids[q])] for q in known], **gbrt_params)

    hold_ids, hold_y, hold_rows = [], [], []
    for pos in hold_pos.tolist():
        sid = int(pool.ids[pos])
        try:
            hold_y.append(query(sid))
        except Exception as exc:
            logger.warning("oracle failed on holdout solution %s: %s", sid, exc)
            continue
        hold_ids.append(sid)
        hold_rows.append(pos)
    err = rmse(model.predict(pool.features[hold_rows]), hold_y) if hold_rows else float("nan")
    return ActiveFit(model, [int(pool.ids[q]) for q in queried], err, hold_ids, targets)


def rank_solutions(model: MetaModel, pool: Pool) -> list[int]:
    """Solution ids by predicted target, best first; ties by ascending id."""
    pred = model.predict(pool.features)
    return pool.ids[np.lexsort((pool.ids, -pred))].tolist()


def transfer_eval(train_pool: Pool, test_pool: Pool, oracle_train, oracle_test,
                  budget: SampleBudget | None = None, seed=0, sample_size: int = 200,
                  **gbrt_params) -> float:
    """RMSE on ``test_pool`` of a model actively fitted on ``train_pool``.

    The test error is measured on ``sample_size`` uniformly drawn test
    solutions (all of them if the pool is smaller).
    """
    if tuple(train_pool.feature_names) != tuple(test_pool.feature_names):
        raise ValidationError("train and test pools carry different property columns")
    fit = active_fit(train_pool, oracle_train, budget, seed, **gbrt_params)
    rng = np.random.default_rng([seed, 1])
    pick = np.sort(rng.choice(len(test_pool), size=min(sample_size, len(test_pool)), replace=False))
    query = _query(oracle_test)
    truth = np.array([query(int(test_pool.ids[i])) for i in pick])
    return rmse(fit.model.predict(test_pool.features[pick]), truth)
