"""The four classifiers behind one fit/predict contract.

Every model's ``predict`` maps an ``(n, 54)`` array to +1 (Fall) / -1 (ADL).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from .knn import KnnModel, knn_fit, knn_predict
from .logreg import LogRegModel, loss_and_grad, lr_fit, lr_predict
from .scaler import Scaler, fit_scaler, transform
from .svm import SvmModel, kernel_quadratic, kkt_violations, svm_fit, svm_predict
from .tree import TreeModel, dt_fit, dt_predict, gini

CLASSIFIER_NAMES = ("dt", "lr", "knn", "svm")
DISPLAY_NAMES = {"dt": "DT", "lr": "LR", "knn": "KNN", "svm": "SVM"}

# Tree splits are invariant to per-feature affine maps, so DT skips scaling.
USES_SCALING = {"dt": False, "lr": True, "knn": True, "svm": True}


@dataclass(frozen=True)
class Hyperparams:
    svm_c: float = 1.0
    svm_scale: float = math.sqrt(54)
    svm_tol: float = 1e-3
    svm_max_passes: int = 200
    lr_learning_rate: float = 0.1
    lr_l2: float = 1e-4
    lr_epochs: int = 500
    dt_max_depth: int = 32
    dt_min_leaf: int = 1

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def _fitter(name: str, hp: Hyperparams, seed: int) -> Callable:
    if name == "dt":
        return lambda X, y: dt_fit(X, y, max_depth=hp.dt_max_depth, min_leaf=hp.dt_min_leaf)
    if name == "lr":
        return lambda X, y: lr_fit(
            X, y, learning_rate=hp.lr_learning_rate, l2=hp.lr_l2, epochs=hp.lr_epochs
        )
    if name == "knn":
        return knn_fit
    if name == "svm":
        return lambda X, y: svm_fit(
            X, y, C=hp.svm_c, scale=hp.svm_scale, tol=hp.svm_tol,
            max_passes=hp.svm_max_passes, seed=seed,
        )
    raise ValueError(f"unknown classifier {name!r}; choose from {', '.join(CLASSIFIER_NAMES)}")


@dataclass(frozen=True)
class TrainedModel:
    name: str
    model: Any
    scaler: Scaler | None

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.scaler is not None:
            X = self.scaler.transform(X)
        return self.model.predict(X)


def train(
    name: str, X, y, hp: Hyperparams = Hyperparams(), scaling: bool = True, seed: int = 0
) -> TrainedModel:
    """Fit ``name`` on ``(X, y)``, z-scoring first when the classifier uses scaling."""
    fit = _fitter(name, hp, seed)
    X = np.asarray(X, dtype=np.float64)
    scaler = fit_scaler(X) if scaling and USES_SCALING[name] else None
    Xt = scaler.transform(X) if scaler is not None else X
    return TrainedModel(name, fit(Xt, np.asarray(y)), scaler)


__all__ = [
    "CLASSIFIER_NAMES", "DISPLAY_NAMES", "Hyperparams", "KnnModel", "LogRegModel", "Scaler",
    "SvmModel", "TrainedModel", "TreeModel", "dt_fit", "dt_predict", "fit_scaler", "gini",
    "kernel_quadratic", "kkt_violations", "knn_fit", "knn_predict", "loss_and_grad", "lr_fit",
    "lr_predict", "svm_fit", "svm_predict", "train", "transform",
]
