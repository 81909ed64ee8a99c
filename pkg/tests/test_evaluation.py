import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from falldetect.classify import Hyperparams
from falldetect.errors import ReportError, UndefinedMetricError
from falldetect.evaluation import (
    ClassifierResult,
    ConfusionMatrix,
    FoldTrainingError,
    build_report,
    compute_metrics,
    cross_validate,
    format_percent,
    make_folds,
)
from falldetect.ingest import Label

CORPUS_LABELS = [Label.FALL] * 1798 + [Label.ADL] * 2707


def test_fold_sizes_full_corpus():
    f = make_folds(CORPUS_LABELS, k=10, seed=0)
    assert sorted(f.sizes()) == [450] * 5 + [451] * 5


def test_stratified_fall_counts():
    f = make_folds(CORPUS_LABELS, k=10, seed=0)
    fold = np.asarray(f.fold_of)
    falls = [int(np.sum(fold[:1798] == k)) for k in range(10)]
    assert set(falls) <= {179, 180}


def test_unstratified_sizes():
    f = make_folds(CORPUS_LABELS, k=10, seed=3, stratified=False)
    assert max(f.sizes()) - min(f.sizes()) <= 1


def test_fold_determinism():
    assert make_folds(CORPUS_LABELS, seed=5) == make_folds(CORPUS_LABELS, seed=5)
    assert make_folds(CORPUS_LABELS, seed=5) != make_folds(CORPUS_LABELS, seed=6)


def test_too_few_rows():
    with pytest.raises(ValueError):
        make_folds([Label.FALL] * 5 + [Label.ADL] * 3, k=10, stratified=False)
    with pytest.raises(ValueError):
        make_folds([Label.FALL] * 5 + [Label.ADL] * 30, k=10)


@settings(max_examples=50)
@given(st.integers(10, 300), st.integers(10, 300), st.integers(2, 10), st.integers(0, 2**32 - 1), st.booleans())
def test_folds_partition(n_fall, n_adl, k, seed, stratified):
    labels = [Label.FALL] * n_fall + [Label.ADL] * n_adl
    f = make_folds(labels, k=k, seed=seed, stratified=stratified)
    tests = [f.test_indices(i) for i in range(k)]
    assert sorted(np.concatenate(tests).tolist()) == list(range(n_fall + n_adl))
    assert max(f.sizes()) - min(f.sizes()) <= 1
    for i in range(k):
        assert set(f.train_indices(i)).isdisjoint(tests[i])
    if stratified:
        falls = [int(np.sum(t < n_fall)) for t in tests]
        assert max(falls) - min(falls) <= 1


@pytest.mark.parametrize(
    "cm,expected",
    [
        (ConfusionMatrix(1776, 22, 22, 2685), ("98.78%", "99.19%", "99.02%")),
        (ConfusionMatrix(1797, 1, 0, 2707), ("99.94%", "100%", "99.98%")),
        (ConfusionMatrix(5, 0, 0, 5), ("100%", "100%", "100%")),
    ],
)
def test_compute_metrics(cm, expected):
    m = compute_metrics(cm)
    assert tuple(map(format_percent, (m.sensitivity, m.specificity, m.accuracy))) == expected


def test_metrics_full_precision():
    m = compute_metrics(ConfusionMatrix(1776, 22, 22, 2685))
    assert m.sensitivity == 100 * 1776 / 1798


@pytest.mark.parametrize("cm", [ConfusionMatrix(0, 0, 1, 1), ConfusionMatrix(1, 1, 0, 0)])
def test_undefined_metric(cm):
    with pytest.raises(UndefinedMetricError):
        compute_metrics(cm)


def test_always_fall_degenerate():
    y = np.array([1] * 30 + [-1] * 70)
    m = compute_metrics(ConfusionMatrix.from_predictions(y, np.ones(100, dtype=int)))
    assert (m.sensitivity, m.specificity, m.accuracy) == (100.0, 0.0, 30.0)


def _clusters(n=60, seed=0, d=54):
    rng = np.random.default_rng(seed)
    y = np.array([1] * n + [-1] * n)
    X = rng.normal(size=(2 * n, d)) + 20.0 * y[:, None]
    return X, y


def test_knn_separated_clusters():
    X, y = _clusters()
    folds = make_folds(y, k=10, seed=0)
    r = cross_validate((X, y), "knn", folds)
    assert r.pooled.fp == 0 and r.pooled.fn == 0
    assert r.pooled.tp == 60 and r.pooled.tn == 60


@pytest.mark.parametrize("name", ["dt", "lr", "knn", "svm"])
def test_pooled_conservation(name):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(150, 54))
    y = np.where(rng.random(150) < 0.4, 1, -1)
    r = cross_validate((X, y), name, make_folds(y, k=5, seed=2))
    assert r.pooled.tp + r.pooled.fn == int((y == 1).sum())
    assert r.pooled.tn + r.pooled.fp == int((y == -1).sum())
    assert sum(r.per_fold, ConfusionMatrix()) == r.pooled


@pytest.mark.parametrize("name", ["dt", "lr", "knn"])
def test_permutation_invariance(name):
    rng = np.random.default_rng(4)
    X = rng.normal(size=(120, 54))
    y = np.where(X[:, 0] + rng.normal(size=120) > 0, 1, -1)
    folds = make_folds(y, k=4, seed=1)
    perm = rng.permutation(120)
    moved = type(folds)(tuple(np.asarray(folds.fold_of)[perm].tolist()), folds.k, folds.seed, folds.stratified)
    a = cross_validate((X, y), name, folds)
    b = cross_validate((X[perm], y[perm]), name, moved)
    assert a.pooled == b.pooled


def test_thread_workers_match_sequential():
    X, y = _clusters(40, seed=3)
    folds = make_folds(y, k=5, seed=0)
    assert cross_validate((X, y), "svm", folds, workers=4) == cross_validate((X, y), "svm", folds)


def test_fold_failure_names_classifier_and_fold():
    X, y = _clusters(20)
    folds = make_folds(y, k=5, seed=0)
    with pytest.raises(FoldTrainingError) as exc:
        cross_validate((X * 1e200, y), "lr", folds, hp=Hyperparams(lr_learning_rate=1e30), scaling=False)
    assert exc.value.classifier == "lr" and exc.value.fold == 0


def _result(name, folds, matrices):
    return ClassifierResult(name, tuple(matrices), sum(matrices, ConfusionMatrix()), folds)


def test_build_report_accepts_consistent():
    y = [1] * 4 + [-1] * 4
    folds = make_folds(y, k=2, seed=9)
    per = [ConfusionMatrix(2, 0, 0, 2), ConfusionMatrix(1, 1, 1, 1)]
    rep = build_report([_result("knn", folds, per)], {"x": 1})
    assert rep.seed == 9
    assert rep.to_dict()["seed"] == 9
    assert rep.to_dict()["classifiers"]["knn"]["pooled"] == {"tp": 3, "fn": 1, "fp": 1, "tn": 3}


def test_build_report_rejects_tampered_pool():
    y = [1] * 4 + [-1] * 4
    folds = make_folds(y, k=2, seed=0)
    per = (ConfusionMatrix(2, 0, 0, 2), ConfusionMatrix(2, 0, 0, 2))
    bad = ClassifierResult("knn", per, ConfusionMatrix(4, 0, 1, 3), folds)
    with pytest.raises(ReportError):
        build_report([bad], {})


def test_build_report_rejects_mixed_folds():
    y = [1] * 4 + [-1] * 4
    per = [ConfusionMatrix(2, 0, 0, 2), ConfusionMatrix(2, 0, 0, 2)]
    a = _result("knn", make_folds(y, k=2, seed=0), per)
    b = _result("svm", make_folds(y, k=2, seed=1), per)
    with pytest.raises(ReportError):
        build_report([a, b], {})


def test_report_csv_and_timing_separate():
    y = [1] * 4 + [-1] * 4
    folds = make_folds(y, k=2, seed=0)
    per = [ConfusionMatrix(2, 0, 0, 2), ConfusionMatrix(2, 0, 0, 2)]
    rep = build_report([_result("dt", folds, per)], {}, timing={"dt": 1.5})
    assert rep.to_csv().splitlines() == ["classifier,fold,tp,fn,fp,tn", "dt,0,2,0,0,2", "dt,1,2,0,0,2"]
    assert "timing" not in rep.to_json() and "1.5" in rep.timing_json()
