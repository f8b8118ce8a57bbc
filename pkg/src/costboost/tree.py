"""Weighted CART trees: Gini classification trees and squared-error regression
trees, stored as flat node arrays.

A split sends a row left iff ``x[feature] < threshold``; thresholds are
midpoints between adjacent distinct feature values.  Among candidates whose
impurity is equal (to a relative 1e-10 of the node weight) the lowest feature
index wins, then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from costboost.errors import AllWeightsZero, DimensionMismatch, EmptyDataset

CLASSIFICATION = "classification"
REGRESSION = "regression"

TIE_RTOL = 1e-10
_GAIN_RTOL = 1e-12


@dataclass(frozen=True)
class TreeParams:
    """Stopping rules.

    ``min_leaf_weight`` is measured in units of the mean row weight
    (total weight / number of rows passed in), so rescaling all weights
    leaves the tree unchanged and ``1.0`` means "one average observation".
    """

    max_depth: int = 30
    min_leaf_weight: float = 1.0
    min_split_improvement: float = 0.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not self.min_leaf_weight > 0:
            raise ValueError("min_leaf_weight must be > 0")
        if self.min_split_improvement < 0:
            raise ValueError("min_split_improvement must be >= 0")

    def to_dict(self):
        return {
            "max_depth": self.max_depth,
            "min_leaf_weight": self.min_leaf_weight,
            "min_split_improvement": self.min_split_improvement,
        }


BAGGING_TREE = TreeParams(max_depth=30, min_leaf_weight=1.0)
WEAK_TREE = TreeParams(max_depth=3, min_leaf_weight=1e-6)
STUMP = TreeParams(max_depth=1, min_leaf_weight=1e-6)


@dataclass(frozen=True)
class Tree:
    """Flat binary tree.  Leaves have ``feature == -1``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    kind: str
    n_features: int

    def __post_init__(self):
        for name, dtype in (
            ("feature", np.int64),
            ("threshold", float),
            ("left", np.int64),
            ("right", np.int64),
            ("value", float),
        ):
            a = np.array(getattr(self, name), dtype=dtype, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def nodes(self) -> list[dict]:
        out = []
        for i in range(self.n_nodes):
            if self.feature[i] < 0:
                out.append({"leaf": True, "value": float(self.value[i])})
            else:
                out.append(
                    {
                        "leaf": False,
                        "feature_index": int(self.feature[i]),
                        "threshold": float(self.threshold[i]),
                        "left": int(self.left[i]),
                        "right": int(self.right[i]),
                    }
                )
        return out

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def predict(self, X) -> np.ndarray:
        """Leaf value reached by every row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"tree expects {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            f = self.feature[node]
            active = np.flatnonzero(f >= 0)
            if active.size == 0:
                return self.value[node]
            at = node[active]
            go_left = X[active, f[active]] < self.threshold[at]
            node[active] = np.where(go_left, self.left[at], self.right[at])

    def to_dict(self) -> dict:
        nodes = [
            [int(f), float(t), int(l), int(r), float(v)]
            for f, t, l, r, v in zip(self.feature, self.threshold, self.left, self.right, self.value)
        ]
        return {"kind": self.kind, "n_features": self.n_features, "nodes": nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        nodes = np.array(d["nodes"], dtype=float).reshape(-1, 5)
        return cls(
            nodes[:, 0].astype(np.int64),
            nodes[:, 1],
            nodes[:, 2].astype(np.int64),
            nodes[:, 3].astype(np.int64),
            nodes[:, 4],
            d["kind"],
            int(d["n_features"]),
        )


def predict_tree(tree: Tree, row) -> float:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict_tree takes a single feature vector")
    return float(tree.predict(row)[0])


# --------------------------------------------------------------------------
# impurity criteria; each returns ``W * impurity`` for left/right stats

def _gini_stats(y, w, t=None):
    pos = y > 0
    return [np.where(pos, w, 0.0), np.where(pos, 0.0, w)]


def _gini_cost(W, pos, neg):
    with np.errstate(divide="ignore", invalid="ignore"):
        return W - (pos * pos + neg * neg) / W


def _sse_stats(y, w, t):
    return [w * t, w * t * t]


def _sse_cost(W, s1, s2):
    with np.errstate(divide="ignore", invalid="ignore"):
        return s2 - s1 * s1 / W


class _Grower:
    def __init__(self, X, y, w, targets, params, kind, min_leaf):
        self.X = X
        self.y = y
        self.w = w
        self.targets = targets
        self.params = params
        self.kind = kind
        if kind == CLASSIFICATION:
            self.stats = np.stack(_gini_stats(y, w), axis=0)
            self.cost = _gini_cost
        else:
            self.stats = np.stack(_sse_stats(y, w, targets), axis=0)
            self.cost = _sse_cost
        self.min_leaf = min_leaf
        self.nodes: list[list] = []

    def leaf_value(self, rows):
        w = self.w[rows]
        if self.kind == CLASSIFICATION:
            pos = w[self.y[rows] > 0].sum()
            neg = w[self.y[rows] < 0].sum()
            # weight tie goes to dislike
            return 1.0 if pos > neg else -1.0
        mean = np.dot(w, self.targets[rows]) / w.sum()
        return float(min(1.0, max(-1.0, mean)))

    def is_pure(self, rows):
        if self.kind == CLASSIFICATION:
            ys = self.y[rows]
            return bool(np.all(ys == ys[0]))
        ts = self.targets[rows]
        return bool(np.all(ts == ts[0]))

    def best_split(self, rows):
        """``(feature, threshold)`` of the best admissible split, or None."""
        Xn = self.X[rows]
        m = Xn.shape[0]
        if m < 2:
            return None
        order = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, order, axis=0)
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            return None
        node_stats = self.stats[:, rows]
        total = node_stats.sum(axis=1)
        W = self.w[rows].sum()
        cum = np.cumsum(node_stats[:, order], axis=1)[:, :-1]
        WL = np.cumsum(self.w[rows][order], axis=0)[:-1]
        WR = W - WL
        right = total[:, None, None] - cum
        scores = self.cost(WL, *cum) + self.cost(WR, *right)
        valid &= (WL >= self.min_leaf) & (WR >= self.min_leaf) & (WR > 0)
        if not valid.any():
            return None
        scores = np.where(valid, scores, np.inf)
        flat = scores.T.ravel()
        best = flat.min()
        parent = float(self.cost(W, *total))
        gain = (parent - best) / W
        if not gain > max(self.params.min_split_improvement, _GAIN_RTOL * parent / W):
            return None
        k = int(np.flatnonzero(flat <= best + TIE_RTOL * W)[0])
        j, i = divmod(k, m - 1)
        return j, (xs[i, j] + xs[i + 1, j]) / 2.0

    def grow(self, rows, depth):
        idx = len(self.nodes)
        self.nodes.append(None)
        split = None
        if depth < self.params.max_depth and not self.is_pure(rows):
            split = self.best_split(rows)
        if split is None:
            self.nodes[idx] = [-1, 0.0, -1, -1, self.leaf_value(rows)]
            return idx
        j, thr = split
        go_left = self.X[rows, j] < thr
        left = self.grow(rows[go_left], depth + 1)
        right = self.grow(rows[~go_left], depth + 1)
        self.nodes[idx] = [j, thr, left, right, 0.0]
        return idx

    def build(self):
        self.grow(np.arange(self.w.size), 0)
        f, t, l, r, v = zip(*self.nodes)
        return Tree(f, t, l, r, v, self.kind, self.X.shape[1])


def _prepare(X, w):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyDataset("cannot fit a tree on empty data")
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=float)
    if w.shape != (X.shape[0],):
        raise DimensionMismatch(f"{w.size} weights for {X.shape[0]} rows")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    if not w.sum() > 0:
        raise AllWeightsZero("all observation weights are zero")
    return X, w


def _grow_tree(X, y, w, targets, params, kind):
    n = w.size
    keep = w > 0
    # zero-weight rows neither vote nor place thresholds; the leaf-size unit
    # still refers to all n rows passed in
    Xk, yk, wk = X[keep], y[keep], w[keep]
    tk = None if targets is None else targets[keep]
    min_leaf = params.min_leaf_weight * w.sum() / n
    return _Grower(Xk, yk, wk, tk, params, kind, min_leaf).build()


def fit_classification_arrays(X, y, w=None, params: TreeParams = BAGGING_TREE) -> Tree:
    X, w = _prepare(X, w)
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise DimensionMismatch("labels length must equal number of rows")
    return _grow_tree(X, y, w, None, params, CLASSIFICATION)


def fit_regression_arrays(X, targets, w=None, params: TreeParams = WEAK_TREE) -> Tree:
    X, w = _prepare(X, w)
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (X.shape[0],):
        raise DimensionMismatch("targets length must equal number of rows")
    return _grow_tree(X, np.sign(targets), w, targets, params, REGRESSION)


def fit_classification_tree(data, weights=None, params: TreeParams = BAGGING_TREE) -> Tree:
    """Greedy weighted-Gini tree on a :class:`~costboost.dataset.BinaryDataset`.

    Leaves predict the label with the larger weighted mass; an exact tie
    predicts -1 (dislike).
    """
    return fit_classification_arrays(data.features, data.labels, weights, params)


def fit_regression_tree(data, targets, weights=None, params: TreeParams = WEAK_TREE) -> Tree:
    """Greedy weighted-SSE tree; leaves hold the weighted target mean clamped to [-1, 1]."""
    return fit_regression_arrays(data.features, targets, weights, params)
