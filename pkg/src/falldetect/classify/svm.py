"""Soft-margin kernel SVM trained by Sequential Minimal Optimization.

The dual is

    min_a  1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j) - sum_i a_i
    s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0

Each step picks the maximally violating pair: the first index has the
smallest prediction error ``E = u - y`` among points whose ``a`` may move
up along ``y``, the second the largest among points that may move down, so
the pair maximises ``|E1 - E2|``.  If that step stalls, a second index is
drawn at random (seeded) from the other violators.  Training stops once the
pair's gap is within ``tol``, which bounds every point's KKT residual by
``tol`` after the bias is placed inside the feasible interval.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, TrainingError

log = logging.getLogger(__name__)

_TAU = 1e-12


def kernel_quadratic(u, v, scale: float) -> float:
    """``(u.v / scale^2 + 1)^2``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if not scale > 0:
        raise ValueError("kernel scale must be positive")
    return float((u @ v / (scale * scale) + 1.0) ** 2)


def quadratic_gram(A: np.ndarray, B: np.ndarray, scale: float) -> np.ndarray:
    return (A @ B.T / (scale * scale) + 1.0) ** 2


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for each support vector
    alpha: np.ndarray
    support_indices: np.ndarray
    b: float
    C: float
    scale: float
    n_iter: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(
                f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}"
            )
        return quadratic_gram(X, self.support_vectors, self.scale) @ self.dual_coef + self.b

    def predict(self, X) -> np.ndarray:
        # exact zero goes to Fall
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


def _bias(v: np.ndarray, alpha: np.ndarray, C: float, up: np.ndarray, low: np.ndarray) -> float:
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(v[free].mean())
    return float(0.5 * (v[up].max() + v[low].min()))


def svm_fit(
    X,
    y,
    C: float = 1.0,
    scale: float | None = None,
    tol: float = 1e-3,
    max_passes: int = 200,
    seed: int = 0,
) -> SvmModel:
    """Train with SMO.  ``y`` must hold +1 (Fall) / -1 (ADL).

    ``scale`` defaults to ``sqrt(n_features)``.  The iteration cap is
    ``max_passes * n_samples`` pair updates; hitting it raises
    :class:`ConvergenceError`.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per label")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if (y > 0).all() or (y < 0).all():
        raise TrainingError("SVM training needs both classes present")
    if not C > 0:
        raise ValueError("C must be positive")
    if scale is None:
        scale = math.sqrt(X.shape[1])

    n = X.shape[0]
    K = quadratic_gram(X, X, scale)
    diag = np.diag(K).copy()
    rng = np.random.default_rng(seed)

    alpha = np.zeros(n)
    # E = u - y with u the bias-free decision value
    E = -y.copy()
    pos = y > 0
    max_iter = max(1, max_passes) * n
    it = 0
    while True:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        v = -E
        i = int(np.flatnonzero(up)[np.argmax(v[up])])
        j = int(np.flatnonzero(low)[np.argmin(v[low])])
        gap = v[i] - v[j]
        if gap <= tol:
            break
        if it >= max_iter:
            raise ConvergenceError(f"SMO did not converge in {max_iter} iterations", float(gap))

        moved = _take_step(i, j, alpha, E, y, K, diag, C)
        if not moved:
            cands = np.flatnonzero(low & (v < v[i] - tol))
            cands = cands[cands != j]
            for j2 in rng.permutation(cands):
                if _take_step(i, int(j2), alpha, E, y, K, diag, C):
                    moved = True
                    break
        if not moved:
            raise ConvergenceError("SMO stalled: no pair makes progress", float(gap))
        it += 1

    up = np.where(pos, alpha < C, alpha > 0)
    low = np.where(pos, alpha > 0, alpha < C)
    b = _bias(-E, alpha, C, up, low)
    sv = np.flatnonzero(alpha > 0)
    log.debug("SMO converged after %d iterations, %d support vectors", it, sv.size)
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coef=(alpha[sv] * y[sv]),
        alpha=alpha[sv].copy(),
        support_indices=sv,
        b=b,
        C=float(C),
        scale=float(scale),
        n_iter=it,
    )


def _take_step(i, j, alpha, E, y, K, diag, C) -> bool:
    """Jointly optimise ``alpha[i]``, ``alpha[j]`` in place; False if nothing moved."""
    if i == j:
        return False
    yi, yj = y[i], y[j]
    ai, aj = alpha[i], alpha[j]
    s = yi * yj
    if s < 0:
        L, H = max(0.0, aj - ai), min(C, C + aj - ai)
    else:
        L, H = max(0.0, ai + aj - C), min(C, ai + aj)
    if H - L <= 0:
        return False
    eta = diag[i] + diag[j] - 2.0 * K[i, j]
    if eta <= 0:
        eta = _TAU
    aj_new = min(max(aj + yj * (E[i] - E[j]) / eta, L), H)
    if abs(aj_new - aj) < _TAU * (aj + aj_new + _TAU):
        return False
    ai_new = ai + s * (aj - aj_new)
    # snap round-off at the box edges
    if ai_new < _TAU * C:
        ai_new = 0.0
    elif ai_new > C * (1 - _TAU):
        ai_new = C
    dai, daj = ai_new - ai, aj_new - aj
    alpha[i], alpha[j] = ai_new, aj_new
    E += (dai * yi) * K[:, i] + (daj * yj) * K[:, j]
    return True


def kkt_violations(model: SvmModel, X, y) -> np.ndarray:
    """Per-point KKT residual of ``model`` on its training set.

    With ``r = y f(x) - 1``: points with ``alpha < C`` need ``r >= 0`` and
    points with ``alpha > 0`` need ``r <= 0``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    alpha = np.zeros(X.shape[0])
    alpha[model.support_indices] = model.alpha
    r = y * model.decision_function(X) - 1.0
    viol = np.where(alpha < model.C, np.maximum(0.0, -r), 0.0)
    return np.maximum(viol, np.where(alpha > 0, np.maximum(0.0, r), 0.0))


def svm_predict(model: SvmModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=np.float64)[None, :])[0])
