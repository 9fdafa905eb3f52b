import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import f1_score, precision_score, recall_score, roc_auc_score

from partition_forge.classify import (LogisticRegressionGD, ThresholdRegression, average_reports,
                                      binary_report, rank_auc, stratified_folds)
from partition_forge.errors import ValidationError


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 5)),
                min_size=2, max_size=40))
def test_binary_report_matches_sklearn(rows):
    y, pred, score = (np.array(c) for c in zip(*rows))
    if len(set(y.tolist())) < 2:
        return
    r = binary_report(y, pred, score)
    for cls in (0, 1):
        kw = dict(pos_label=cls, zero_division=0)
        assert r.precision[cls] == pytest.approx(precision_score(y, pred, **kw))
        assert r.recall[cls] == pytest.approx(recall_score(y, pred, **kw))
        assert r.f1[cls] == pytest.approx(f1_score(y, pred, **kw))
    assert r.auc == pytest.approx(roc_auc_score(y, score))
    assert sum(r.support) == len(y)
    (tn, fp), (fn, tp) = r.confusion
    assert r.accuracy == pytest.approx((tp + tn) / len(y))


def test_rank_auc_needs_both_classes():
    with pytest.raises(ValidationError):
        rank_auc([1, 1], [0.1, 0.2])


def test_average_reports_pools_counts():
    a = binary_report([0, 1, 1, 0], [0, 1, 0, 0], [0.1, 0.9, 0.4, 0.2])
    b = binary_report([0, 1, 0, 0], [1, 1, 0, 0], [0.6, 0.8, 0.1, 0.3])
    avg = average_reports([a, b])
    assert avg.folds == 2
    assert avg.f1[1] == pytest.approx((a.f1[1] + b.f1[1]) / 2)
    assert avg.support == (5, 3)
    assert avg.accuracy == pytest.approx(6 / 8)


def test_stratified_folds_balance():
    y = np.array([1] * 10 + [0] * 43)
    folds = stratified_folds(y, 5, seed=0)
    for k in range(5):
        assert (y[folds == k] == 1).sum() == 2
        assert abs((y[folds == k] == 0).sum() - 43 / 5) < 1
    assert np.array_equal(folds, stratified_folds(y, 5, seed=0))


def test_stratified_folds_too_few_members():
    with pytest.raises(ValidationError, match="at most 3 folds"):
        stratified_folds(np.array([1, 1, 1, 0, 0, 0, 0, 0]), 5)


def test_threshold_regression_separable():
    x = np.r_[np.zeros(20), np.ones(5)].reshape(-1, 1) + np.linspace(0, 0.1, 25)[:, None]
    y = np.r_[np.zeros(20), np.ones(5)].astype(int)
    model = ThresholdRegression().fit(x, y)
    assert model.predict(x).tolist() == y.tolist()
    assert not model.ridge_


def test_threshold_matches_exhaustive_scan(rng):
    x = rng.normal(size=(60, 3))
    y = (x[:, 0] + rng.normal(scale=1.0, size=60) > 0.8).astype(int)
    model = ThresholdRegression().fit(x, y)
    scores = model.decision_function(x)
    best, best_t = -1.0, None
    for t in sorted(set(scores.tolist())):
        f = f1_score(y, (scores >= t).astype(int), zero_division=0)
        if f >= best:
            best, best_t = f, t
    assert model.threshold_ == best_t


def test_threshold_regression_singular_design_uses_ridge(caplog):
    x = np.column_stack([np.arange(10.0), 2 * np.arange(10.0), np.ones(10)])
    y = (np.arange(10) > 6).astype(int)
    with caplog.at_level(logging.INFO):
        model = ThresholdRegression().fit(x, y)
    assert model.ridge_
    assert "ridge" in caplog.text
    assert model.predict(x).tolist() == y.tolist()


def test_logistic_regression_learns_direction(rng):
    x = rng.normal(size=(300, 2))
    y = (x[:, 0] - x[:, 1] > 0).astype(int)
    model = LogisticRegressionGD().fit(x, y)
    assert (model.predict(x) == y).mean() > 0.95
    assert model.coef_[1] > 0 > model.coef_[2]
