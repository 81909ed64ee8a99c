"""Per-feature z-scoring fitted on training rows only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.mean.shape[0]:
            raise ValueError(f"expected {self.mean.shape[0]} features, got {X.shape[-1]}")
        return (X - self.mean) / self.std


def fit_scaler(X) -> Scaler:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TrainingError(f"scaler needs at least 2 training rows, got shape {X.shape}")
    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), STD_FLOOR)
    return Scaler(mean, std)


def transform(scaler: Scaler, X) -> np.ndarray:
    return scaler.transform(X)
