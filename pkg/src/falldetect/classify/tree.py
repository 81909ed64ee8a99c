"""Binary CART tree with Gini impurity.

Labels are +1 (Fall) and -1 (ADL).  Samples with ``x[feature] <= threshold``
go left.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError

FALL, ADL = 1, -1


def gini(n_fall: float, n: float) -> float:
    """``1 - sum(p_c^2)`` for a node with ``n_fall`` falls out of ``n`` samples."""
    if n <= 0:
        return 0.0
    p = n_fall / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _majority(y: np.ndarray) -> int:
    n_fall = int((y == FALL).sum())
    return FALL if 2 * n_fall >= y.size else ADL


@dataclass
class TreeModel:
    # Flat node arrays; leaves have feature == -1.
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[int] = field(default_factory=list)
    n_features: int = 0

    def _add(self, feature=-1, threshold=0.0, value=0) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f < 0)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] >= 0:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, x in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.value[node]
        return out


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Lowest weighted-Gini axis-aligned split, or None when nothing is splittable.

    Ties resolve to the lowest feature index, then the lowest threshold.
    """
    n, d = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    fall = (y[order] == FALL).astype(np.float64)

    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    f_left = np.cumsum(fall, axis=0)[:-1]
    f_right = fall.sum(axis=0)[None, :] - f_left
    # n * weighted Gini = sum over children of (n_c - sum_k count_k^2 / n_c)
    cost = (n_left - (f_left**2 + (n_left - f_left) ** 2) / n_left) + (
        n_right - (f_right**2 + (n_right - f_right) ** 2) / n_right
    )
    valid = xs[1:] > xs[:-1]
    valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    cost = np.where(valid, cost, np.inf)
    flat = np.argmin(cost.T)  # feature-major
    feat, pos = divmod(int(flat), n - 1)
    lo, hi = xs[pos, feat], xs[pos + 1, feat]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return feat, float(thr), float(cost[pos, feat] / n)


def dt_fit(X, y, max_depth: int | None = 32, min_leaf: int = 1) -> TreeModel:
    """Greedy CART construction.

    A node becomes a leaf when pure, at ``max_depth``, when it cannot give
    both children ``min_leaf`` samples, or when all its rows are identical.
    Impure nodes are split even when the best split does not reduce Gini.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise TrainingError("decision tree needs a non-empty 2-D training set")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y lengths differ")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    depth_cap = np.inf if max_depth is None else max_depth

    model = TreeModel(n_features=X.shape[1])
    root = model._add()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        model.value[node] = _majority(ys)
        pure = np.all(ys == ys[0])
        if pure or depth >= depth_cap or idx.size < 2 * min_leaf:
            continue
        split = _best_split(X[idx], ys, min_leaf)
        if split is None:
            continue
        feat, thr, _ = split
        go_left = X[idx, feat] <= thr
        model.feature[node] = feat
        model.threshold[node] = thr
        model.left[node] = model._add()
        model.right[node] = model._add()
        stack.append((model.right[node], idx[~go_left], depth + 1))
        stack.append((model.left[node], idx[go_left], depth + 1))
    return model


def dt_predict(model: TreeModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=np.float64)[None, :])[0])
