"""1-nearest-neighbour classifier, Euclidean metric, brute force."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

_CHUNK = 32


@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 1

    def predict(self, Q) -> np.ndarray:
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        if Q.shape[1] != self.X.shape[1]:
            raise ValueError(f"expected {self.X.shape[1]} features, got {Q.shape[1]}")
        out = np.empty(Q.shape[0], dtype=np.int64)
        for start in range(0, Q.shape[0], _CHUNK):
            q = Q[start : start + _CHUNK]
            # Explicit differences rather than the |a|^2 - 2ab + |b|^2 expansion,
            # so exact ties stay exact and argmin picks the lowest index.
            d2 = ((q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            out[start : start + _CHUNK] = self.y[np.argmin(d2, axis=1)]
        return out


def knn_fit(X, y) -> KnnModel:
    X = np.array(X, dtype=np.float64)
    y = np.array(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise TrainingError("KNN needs a non-empty 2-D training set")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y lengths differ")
    if np.unique(y).size < 2:
        raise TrainingError("KNN needs at least one stored vector per class")
    X.setflags(write=False)
    y.setflags(write=False)
    return KnnModel(X, y)


def knn_predict(model: KnnModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=np.float64)[None, :])[0])
