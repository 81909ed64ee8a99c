"""L2-regularised logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import TrainingError


@dataclass(frozen=True)
class LogRegModel:
    w: np.ndarray
    b: float
    losses: tuple[float, ...] = field(default=(), repr=False)

    def proba(self, X) -> np.ndarray:
        """P(Fall | x)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.w.shape[0]:
            raise ValueError(f"expected {self.w.shape[0]} features, got {X.shape[1]}")
        return expit(X @ self.w + self.b)

    def predict(self, X) -> np.ndarray:
        return np.where(self.proba(X) >= 0.5, 1, -1)


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean negative log-likelihood plus ``l2/2 * |w|^2`` (bias unpenalised).

    ``y`` holds +1 / -1.  Returns ``(loss, grad_w, grad_b)``.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        margin = y * (X @ w + b)
        loss = np.logaddexp(0.0, -margin).mean() + 0.5 * l2 * float(w @ w)
        # d/dz log(1 + e^{-yz}) = -y * sigmoid(-yz)
        coef = -y * expit(-margin) / X.shape[0]
        return float(loss), X.T @ coef + l2 * w, float(coef.sum())


def lr_fit(X, y, learning_rate: float = 0.1, l2: float = 1e-4, epochs: int = 500) -> LogRegModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per label")
    if np.unique(y).size < 2:
        raise TrainingError("logistic regression needs both classes in the training set")
    if learning_rate <= 0 or epochs < 0 or l2 < 0:
        raise ValueError("learning_rate must be > 0, epochs and l2 >= 0")

    w = np.zeros(X.shape[1])
    b = 0.0
    losses = []
    for epoch in range(epochs):
        loss, gw, gb = loss_and_grad(w, b, X, y, l2)
        if not np.isfinite(loss):
            raise TrainingError(
                f"logistic regression diverged at epoch {epoch}; try a smaller learning rate"
            )
        losses.append(loss)
        w = w - learning_rate * gw
        b = b - learning_rate * gb
    final = loss_and_grad(w, b, X, y, l2)[0]
    if not (np.isfinite(final) and np.all(np.isfinite(w)) and np.isfinite(b)):
        raise TrainingError("logistic regression diverged; try a smaller learning rate")
    losses.append(final)
    return LogRegModel(w, float(b), tuple(losses))


def lr_predict(model: LogRegModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=np.float64)[None, :])[0])
