"""k-fold cross-validation, pooled confusion matrices and SE/SP/accuracy."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .classify import DISPLAY_NAMES, Hyperparams, train
from .errors import FallDetectError, ReportError, TrainingError, UndefinedMetricError
from .features import FeatureMatrix
from .ingest import Label

log = logging.getLogger(__name__)


def _as_sign(labels) -> np.ndarray:
    """Labels (``Label`` members, strings or +/-1) as a +1 Fall / -1 ADL array."""
    out = []
    for lab in labels:
        if isinstance(lab, Label):
            out.append(1 if lab is Label.FALL else -1)
        elif isinstance(lab, str):
            out.append(1 if Label.parse(lab) is Label.FALL else -1)
        else:
            if lab not in (1, -1):
                raise ValueError(f"numeric labels must be +1 or -1, got {lab!r}")
            out.append(int(lab))
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: tuple[int, ...]
    k: int
    seed: int
    stratified: bool

    def __len__(self) -> int:
        return len(self.fold_of)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_of) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_of) != fold)

    def sizes(self) -> list[int]:
        return np.bincount(np.asarray(self.fold_of), minlength=self.k).tolist()


def make_folds(labels: Sequence, k: int = 10, seed: int = 0, stratified: bool = True) -> FoldAssignment:
    """Random k-fold assignment.

    Rows are shuffled (per class when stratified) and dealt round-robin;
    stratified dealing continues the rotation from one class into the next so
    that overall fold sizes also differ by at most one.
    """
    y = _as_sign(labels)
    n = y.size
    if k < 2:
        raise ValueError(f"need k >= 2 folds, got {k}")
    if n < k:
        raise ValueError(f"{n} rows cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    if stratified:
        groups = [np.flatnonzero(y == 1), np.flatnonzero(y == -1)]
        for g, name in zip(groups, ("FALL", "ADL")):
            if g.size < k:
                raise ValueError(f"stratified {k}-fold needs >= {k} {name} rows, got {g.size}")
        order = np.concatenate([rng.permutation(g) for g in groups])
    else:
        order = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    return FoldAssignment(tuple(int(f) for f in fold_of), k, seed, stratified)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Fall is the positive class."""

    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        t = _as_sign(y_true)
        p = _as_sign(y_pred)
        return cls(
            tp=int(((t == 1) & (p == 1)).sum()),
            fn=int(((t == 1) & (p == -1)).sum()),
            fp=int(((t == -1) & (p == 1)).sum()),
            tn=int(((t == -1) & (p == -1)).sum()),
        )

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fn + other.fn, self.fp + other.fp, self.tn + other.tn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


@dataclass(frozen=True)
class Metrics:
    sensitivity: float
    specificity: float
    accuracy: float

    def as_dict(self) -> dict[str, float]:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
        }


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """Percentages: SE = TP/(TP+FN), SP = TN/(TN+FP), accuracy over all rows."""
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("sensitivity undefined: no actual falls (TP + FN = 0)")
    if cm.tn + cm.fp == 0:
        raise UndefinedMetricError("specificity undefined: no actual ADLs (TN + FP = 0)")
    return Metrics(
        sensitivity=100.0 * cm.tp / (cm.tp + cm.fn),
        specificity=100.0 * cm.tn / (cm.tn + cm.fp),
        accuracy=100.0 * (cm.tp + cm.tn) / cm.total,
    )


def format_percent(value: float) -> str:
    """Two decimals, except an exact 100 which prints bare."""
    return "100%" if value == 100.0 else f"{value:.2f}%"


class FoldTrainingError(TrainingError):
    def __init__(self, classifier: str, fold: int, cause: Exception):
        self.classifier = classifier
        self.fold = fold
        super().__init__(f"{classifier} failed on fold {fold}: {cause}")


@dataclass(frozen=True)
class ClassifierResult:
    name: str
    per_fold: tuple[ConfusionMatrix, ...]
    pooled: ConfusionMatrix
    folds: FoldAssignment = field(repr=False, compare=False)


def cross_validate(
    data: FeatureMatrix | tuple[np.ndarray, np.ndarray],
    classifier: str,
    folds: FoldAssignment,
    hp: Hyperparams = Hyperparams(),
    scaling: bool = True,
    workers: int = 1,
) -> ClassifierResult:
    """Train on k-1 folds, predict the held-out fold, pool the confusion matrices."""
    if isinstance(data, FeatureMatrix):
        X, y = data.X, data.y
    else:
        X, y = np.asarray(data[0], dtype=np.float64), _as_sign(data[1])
    if len(folds) != X.shape[0]:
        raise ValueError(f"fold assignment covers {len(folds)} rows, data has {X.shape[0]}")

    def run(fold: int) -> ConfusionMatrix:
        tr, te = folds.train_indices(fold), folds.test_indices(fold)
        try:
            model = train(classifier, X[tr], y[tr], hp=hp, scaling=scaling, seed=folds.seed + fold)
            pred = model.predict(X[te]) if te.size else np.empty(0, dtype=np.int64)
        except FallDetectError as exc:
            raise FoldTrainingError(classifier, fold, exc) from exc
        return ConfusionMatrix.from_predictions(y[te], pred)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, folds.k)) as pool:
            per_fold = tuple(pool.map(run, range(folds.k)))
    else:
        per_fold = tuple(run(f) for f in range(folds.k))
    pooled = sum(per_fold, ConfusionMatrix())
    log.info("%s pooled: %s", classifier, pooled.as_dict())
    return ClassifierResult(classifier, per_fold, pooled, folds)


@dataclass(frozen=True)
class Report:
    results: tuple[ClassifierResult, ...]
    config: Mapping[str, Any]
    seed: int
    k: int
    stratified: bool
    n_rows: int
    timing: Mapping[str, float] = field(default_factory=dict, compare=False)

    def metrics(self) -> dict[str, Metrics]:
        return {r.name: compute_metrics(r.pooled) for r in self.results}

    def to_dict(self) -> dict[str, Any]:
        """Deterministic content; timing is kept out so reports compare byte-for-byte."""
        classifiers = {}
        for r in self.results:
            classifiers[r.name] = {
                "pooled": r.pooled.as_dict(),
                "metrics": compute_metrics(r.pooled).as_dict(),
                "per_fold": [cm.as_dict() for cm in r.per_fold],
            }
        return {
            "seed": self.seed,
            "folds": self.k,
            "stratified": self.stratified,
            "n_rows": self.n_rows,
            "config": dict(self.config),
            "classifiers": classifiers,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def timing_json(self) -> str:
        return json.dumps(dict(self.timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["classifier", "fold", "tp", "fn", "fp", "tn"])
        for r in self.results:
            for fold, cm in enumerate(r.per_fold):
                w.writerow([r.name, fold, cm.tp, cm.fn, cm.fp, cm.tn])
        return buf.getvalue()

    def table(self) -> str:
        return format_table(
            [(DISPLAY_NAMES.get(r.name, r.name), compute_metrics(r.pooled)) for r in self.results]
        )


def format_table(rows: Iterable[tuple[str, Metrics]]) -> str:
    """Console table with the columns Classifier | SE | SP | Accuracy."""
    lines = [f"{'Classifier':<10} {'SE':>8} {'SP':>8} {'Accuracy':>9}"]
    for name, m in rows:
        lines.append(
            f"{name:<10} {format_percent(m.sensitivity):>8} "
            f"{format_percent(m.specificity):>8} {format_percent(m.accuracy):>9}"
        )
    return "\n".join(lines)


def build_report(
    results: Sequence[ClassifierResult],
    config: Mapping[str, Any],
    timing: Mapping[str, float] | None = None,
) -> Report:
    if not results:
        raise ReportError("report needs at least one classifier result")
    folds = results[0].folds
    names = set()
    for r in results:
        if r.folds != folds:
            raise ReportError(f"{r.name} was evaluated on a different fold assignment")
        if r.name in names:
            raise ReportError(f"duplicate classifier {r.name}")
        names.add(r.name)
        if len(r.per_fold) != folds.k:
            raise ReportError(f"{r.name}: expected {folds.k} per-fold matrices, got {len(r.per_fold)}")
        if sum(r.per_fold, ConfusionMatrix()) != r.pooled:
            raise ReportError(f"{r.name}: pooled matrix is not the sum of its per-fold matrices")
        if r.pooled.total != len(folds):
            raise ReportError(f"{r.name}: pooled total {r.pooled.total} != {len(folds)} rows")
    return Report(
        results=tuple(results),
        config=dict(config),
        seed=folds.seed,
        k=folds.k,
        stratified=folds.stratified,
        n_rows=len(folds),
        timing=dict(timing or {}),
    )
