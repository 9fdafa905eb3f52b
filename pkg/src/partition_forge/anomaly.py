"""Node anomaly detection from community-derived node features.

Each node gets six features from the graph and a partition augmented with
one two-node auxiliary community per cross-community edge. A thresholded
least-squares regression scores nodes; quality is measured by stratified
k-fold cross-validation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classify import TaskResult, ThresholdRegression, average_reports, binary_report, stratified_folds
from .errors import ValidationError
from .graph import Graph, NodeLabels
from .metrics import community_stats, local_clustering
from .partition import Partition, canonical_assign, check_partition, cross_edge_counts

logger = logging.getLogger(__name__)

__all__ = [
    "FEATURE_NAMES",
    "AnomalyFeatures",
    "anomaly_features",
    "cross_validate",
    "train_eval_anomaly",
    "evaluate_pool_anomaly",
]

FEATURE_NAMES = (
    "membership_count",
    "membership_per_neighbor",
    "one_minus_clustering",
    "degree_per_weight",
    "cliqueness",
    "starkness",
)


@dataclass(frozen=True, eq=False)
class AnomalyFeatures:
    """``(n, 6)`` feature matrix; columns follow :data:`FEATURE_NAMES`.

    ``isolated`` flags nodes without neighbors, whose ratio features are 0.
    """

    values: np.ndarray
    isolated: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.values[:, FEATURE_NAMES.index(name)]


def anomaly_features(g: Graph, p: Partition) -> AnomalyFeatures:
    check_partition(g, p)
    assign = canonical_assign(p.assign)
    deg = g.degree.astype(np.float64)
    isolated = deg == 0
    if isolated.any():
        logger.info("%d isolated node(s): ratio features set to 0", int(isolated.sum()))
    safe_deg = np.where(isolated, 1.0, deg)
    membership = 1.0 + cross_edge_counts(g, assign)
    strength = g.strength
    per_weight = np.zeros(g.node_count)
    ok = strength > 0
    per_weight[ok] = deg[ok] / strength[ok]
    stats = community_stats(g, assign)
    values = np.column_stack([
        membership,
        np.where(isolated, 0.0, membership / safe_deg),
        1.0 - local_clustering(g),
        per_weight,
        stats.density[assign],
        stats.centralization[assign],
    ])
    return AnomalyFeatures(values, isolated)


def cross_validate(x, y, folds: int = 5, seed=0) -> TaskResult:
    """Stratified k-fold evaluation of :class:`ThresholdRegression` on ``(x, y)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if len(np.unique(y)) < 2:
        raise ValidationError("both classes must be present")
    fold_of = stratified_folds(y, folds, seed)
    reports = []
    for k in range(folds):
        test = fold_of == k
        model = ThresholdRegression().fit(x[~test], y[~test])
        reports.append(binary_report(y[test], model.predict(x[test]),
                                     model.decision_function(x[test])))
    return average_reports(reports)


def train_eval_anomaly(g: Graph, p: Partition, labels, folds: int = 5, seed=0) -> TaskResult:
    """Cross-validated anomaly detection quality of partition ``p``."""
    y = labels.labels if isinstance(labels, NodeLabels) else np.asarray(labels)
    if len(y) != g.node_count:
        raise ValidationError("labels do not cover the graph")
    return cross_validate(anomaly_features(g, p).values, y, folds, seed)


def evaluate_pool_anomaly(records, g: Graph, labels, folds: int = 5, seed=0):
    """Run :func:`train_eval_anomaly` on every archived partition.

    The fold assignment depends only on ``labels`` and ``seed`` and is
    shared across the pool. A failing solution yields ``(id, None, message)``
    and the loop moves on.

    Returns:
        List of ``(solution_id, TaskResult | None, error_message)``.
    """
    out = []
    for rec in records:
        try:
            out.append((rec.id, train_eval_anomaly(g, rec.partition, labels, folds, seed), ""))
        except Exception as exc:  # recorded per solution, run continues
            logger.warning("solution %s failed: %s", rec.id, exc)
            out.append((rec.id, None, f"{type(exc).__name__}: {exc}"))
    return out
