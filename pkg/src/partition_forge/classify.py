"""Small linear classifiers and the metrics reported by both downstream tasks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "TaskResult",
    "binary_report",
    "average_reports",
    "rank_auc",
    "stratified_folds",
    "ThresholdRegression",
    "LogisticRegressionGD",
]

RIDGE_FALLBACK = 1e-6


@dataclass(frozen=True)
class TaskResult:
    """Per-class precision/recall/F1/support, accuracy and AUC.

    Class-indexed fields are ``(class 0, class 1)`` pairs. ``confusion`` is
    ``((tn, fp), (fn, tp))`` summed over folds.
    """

    precision: tuple[float, float]
    recall: tuple[float, float]
    f1: tuple[float, float]
    support: tuple[int, int]
    accuracy: float
    auc: float
    folds: int = 1
    confusion: tuple[tuple[int, int], tuple[int, int]] = ((0, 0), (0, 0))

    def metric(self, name: str = "f1", cls: int = 1) -> float:
        if name in ("accuracy", "auc"):
            return float(getattr(self, name))
        return float(getattr(self, name)[cls])


def rank_auc(y_true, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic (ties averaged)."""
    y = np.asarray(y_true).astype(bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC needs both classes")
    ranks = rankdata(np.asarray(scores, dtype=np.float64))
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def binary_report(y_true, y_pred, scores) -> TaskResult:
    y = np.asarray(y_true).astype(bool)
    pred = np.asarray(y_pred).astype(bool)
    tp = int(np.sum(y & pred))
    fp = int(np.sum(~y & pred))
    fn = int(np.sum(y & ~pred))
    tn = int(np.sum(~y & ~pred))
    p1, r1, f1 = _prf(tp, fp, fn)
    p0, r0, f0 = _prf(tn, fn, fp)
    return TaskResult(
        precision=(p0, p1), recall=(r0, r1), f1=(f0, f1),
        support=(tn + fp, tp + fn),
        accuracy=(tp + tn) / len(y),
        auc=rank_auc(y, scores),
        folds=1,
        confusion=((tn, fp), (fn, tp)),
    )


def average_reports(reports: list[TaskResult]) -> TaskResult:
    """Fold-average precision/recall/F1/AUC; pool supports, confusion and accuracy."""
    conf = np.sum([np.array(r.confusion) for r in reports], axis=0)
    (tn, fp), (fn, tp) = conf.tolist()

    def mean_pair(name):
        return tuple(float(np.mean([getattr(r, name)[c] for r in reports])) for c in (0, 1))

    return TaskResult(
        precision=mean_pair("precision"),
        recall=mean_pair("recall"),
        f1=mean_pair("f1"),
        support=(int(tn + fp), int(tp + fn)),
        accuracy=float((tp + tn) / conf.sum()),
        auc=float(np.mean([r.auc for r in reports])),
        folds=len(reports),
        confusion=((int(tn), int(fp)), (int(fn), int(tp))),
    )


def stratified_folds(y, folds: int, seed=None) -> np.ndarray:
    """Fold index per sample, dealing each class round-robin after a shuffle."""
    y = np.asarray(y)
    if folds < 2:
        raise ValidationError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    out = np.empty(len(y), dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < folds:
            raise ValidationError(
                f"class {cls} has {len(idx)} sample(s), fewer than {folds} folds; "
                f"use at most {len(idx)} folds")
        out[rng.permutation(idx)] = np.arange(len(idx)) % folds
    return out


class _Standardizer:
    def __init__(self, x):
        self.mean = x.mean(axis=0)
        std = x.std(axis=0)
        self.std = np.where(std > 0, std, 1.0)

    def __call__(self, x):
        return (x - self.mean) / self.std


def _design(z):
    return np.column_stack([np.ones(len(z)), z])


class ThresholdRegression:
    """Least-squares regression of a 0/1 label, cut at a tuned threshold.

    Features are standardized with training statistics. The threshold is
    the training score that maximizes class-1 F1 when predicting
    ``score >= threshold``; ties keep the larger threshold.
    """

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.scaler_ = _Standardizer(x)
        a = _design(self.scaler_(x))
        self.ridge_ = np.linalg.matrix_rank(a) < a.shape[1]
        if self.ridge_:
            logger.info("singular design matrix; ridge fallback lambda=%g", RIDGE_FALLBACK)
            self.coef_ = np.linalg.solve(a.T @ a + RIDGE_FALLBACK * np.eye(a.shape[1]), a.T @ y)
        else:
            self.coef_ = np.linalg.lstsq(a, y, rcond=None)[0]
        self.threshold_ = self._best_threshold(a @ self.coef_, y.astype(bool))
        return self

    @staticmethod
    def _best_threshold(scores, y):
        order = np.argsort(-scores, kind="stable")
        s = scores[order]
        tp = np.cumsum(y[order])
        predicted = np.arange(1, len(s) + 1)
        # last position of each run of equal scores = "predict score >= s"
        last = np.flatnonzero(np.append(s[1:] != s[:-1], True))
        f1 = 2.0 * tp[last] / (predicted[last] + y.sum())
        best = np.flatnonzero(f1 == f1.max())[0]
        return float(s[last[best]])

    def decision_function(self, x):
        return _design(self.scaler_(np.asarray(x, dtype=np.float64))) @ self.coef_

    def predict(self, x):
        return (self.decision_function(x) >= self.threshold_).astype(np.int64)


class LogisticRegressionGD:
    """Logistic regression trained by full-batch gradient descent on standardized features."""

    def __init__(self, learning_rate=0.1, epochs=500):
        self.learning_rate = learning_rate
        self.epochs = epochs

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.scaler_ = _Standardizer(x)
        a = _design(self.scaler_(x))
        w = np.zeros(a.shape[1])
        for _ in range(self.epochs):
            p = _sigmoid(a @ w)
            w -= self.learning_rate * (a.T @ (p - y)) / len(y)
        self.coef_ = w
        return self

    def predict_proba(self, x):
        return _sigmoid(_design(self.scaler_(np.asarray(x, dtype=np.float64))) @ self.coef_)

    def predict(self, x):
        return (self.predict_proba(x) >= 0.5).astype(np.int64)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))
