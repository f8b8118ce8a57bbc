"""Bootstrap-aggregated classification trees, out-of-bag error and
permutation importance."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from costboost.boosting import CostMatrix, init_weights
from costboost.dataset import DISLIKE, FAVOR, BinaryDataset
from costboost.errors import DimensionMismatch, EmptyDataset, MaskMismatch
from costboost.tree import BAGGING_TREE, TreeParams, fit_classification_arrays


@dataclass(frozen=True)
class BaggedEnsemble:
    trees: tuple
    in_bag: np.ndarray  # (n_trees, n) bool
    feature_names: tuple
    seed: int
    params: TreeParams = BAGGING_TREE
    cost: CostMatrix | None = None

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        mask = np.array(self.in_bag, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "in_bag", mask)
        if mask.ndim != 2 or mask.shape[0] != len(self.trees):
            raise MaskMismatch("need one in-bag mask per tree")

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_train(self) -> int:
        return self.in_bag.shape[1]

    def tree_votes(self, X) -> np.ndarray:
        """(n_trees, n_rows) matrix of +-1 tree predictions."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(self.feature_names):
            raise DimensionMismatch(f"model expects {len(self.feature_names)} features, got {X.shape[1]}")
        return np.stack([t.predict(X) for t in self.trees])

    def decision_function(self, X) -> np.ndarray:
        """Mean vote in [-1, 1]."""
        return self.tree_votes(X).mean(axis=0)

    def predict(self, X) -> np.ndarray:
        votes = self.tree_votes(X).sum(axis=0)
        return np.where(votes > 0, FAVOR, DISLIKE)


@dataclass(frozen=True)
class OobCurve:
    """``errors[t-1]`` is the OOB error of the first ``t`` trees.

    Where no row is out-of-bag for any of the first ``t`` trees the entry
    is 0 and ``defined[t-1]`` is False.
    """

    errors: np.ndarray
    defined: np.ndarray
    n_evaluated: np.ndarray

    @property
    def final(self) -> float:
        return float(self.errors[-1])


@dataclass(frozen=True)
class ImportanceReport:
    feature_names: tuple
    scores: np.ndarray
    method: str = "oob-permutation"
    threshold_used: float | None = None
    mean_delta: np.ndarray = field(default=None, repr=False)
    std_delta: np.ndarray = field(default=None, repr=False)


def _sampling_probs(data: BinaryDataset, cost: CostMatrix | None) -> np.ndarray:
    if cost is None:
        return np.full(data.n, 1.0 / data.n)
    return init_weights(data, cost)


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def fit_bagged(
    data: BinaryDataset,
    n_trees: int = 400,
    params: TreeParams = BAGGING_TREE,
    seed: int = 42,
    cost: CostMatrix | None = None,
    n_jobs: int = 1,
) -> BaggedEnsemble:
    """Grow ``n_trees`` trees on size-n bootstrap samples.

    Tree ``t`` draws its sample from ``default_rng([seed, t])``, so results do
    not depend on ``n_jobs``.  With a cost matrix, rows are drawn with
    probability proportional to their cost-adjusted prior weight.
    """
    if data.n < 2:
        raise EmptyDataset("bagging needs at least 2 rows")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X, y, n = data.features, data.labels, data.n
    p = _sampling_probs(data, cost)

    def grow(t):
        rng = np.random.default_rng([seed, t])
        counts = np.bincount(rng.choice(n, size=n, replace=True, p=p), minlength=n)
        return fit_classification_arrays(X, y, counts.astype(float), params), counts > 0

    grown = _map(grow, range(n_trees), n_jobs)
    trees = [g[0] for g in grown]
    masks = np.stack([g[1] for g in grown])
    return BaggedEnsemble(trees, masks, data.feature_names, seed, params, cost)


def predict_bagged(ensemble: BaggedEnsemble, row) -> int:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict_bagged takes a single feature vector")
    return int(ensemble.predict(row)[0])


def _check_masks(ensemble: BaggedEnsemble, data: BinaryDataset):
    if ensemble.n_train != data.n:
        raise MaskMismatch(f"ensemble was trained on {ensemble.n_train} rows, data has {data.n}")
    if data.d != len(ensemble.feature_names):
        raise DimensionMismatch("data feature count differs from the ensemble's")


def oob_error_curve(ensemble: BaggedEnsemble, data: BinaryDataset) -> OobCurve:
    _check_masks(ensemble, data)
    oob = ~ensemble.in_bag
    votes = np.cumsum(ensemble.tree_votes(data.features) * oob, axis=0)
    seen = np.cumsum(oob, axis=0) > 0
    wrong = (np.where(votes > 0, FAVOR, DISLIKE) != data.labels) & seen
    n_eval = seen.sum(axis=1)
    errors = np.divide(wrong.sum(axis=1), n_eval, out=np.zeros(n_eval.size), where=n_eval > 0)
    return OobCurve(errors, n_eval > 0, n_eval)


def permutation_importance(
    ensemble: BaggedEnsemble, data: BinaryDataset, seed: int = 42, n_jobs: int = 1
) -> ImportanceReport:
    """Out-of-bag permutation importance.

    For every tree, each feature is shuffled among that tree's OOB rows and
    the rise in the tree's OOB error is recorded.  A feature's score is the
    mean rise over trees divided by its standard deviation (0 when that
    deviation is 0).  Trees without OOB rows are skipped.
    """
    _check_masks(ensemble, data)
    X, y, d = data.features, data.labels, data.d

    def deltas(t):
        tree = ensemble.trees[t]
        rows = np.flatnonzero(~ensemble.in_bag[t])
        out = np.zeros(d)
        if rows.size == 0:
            return None
        rng = np.random.default_rng([seed, t])
        Xo, yo = X[rows], y[rows]
        base = np.mean(tree.predict(Xo) != yo)
        used = set(tree.feature[tree.feature >= 0].tolist())
        for j in range(d):
            perm = rng.permutation(rows.size)
            if j not in used:
                continue
            Xp = Xo.copy()
            Xp[:, j] = Xo[perm, j]
            out[j] = np.mean(tree.predict(Xp) != yo) - base
        return out

    rows = [r for r in _map(deltas, range(ensemble.n_trees), n_jobs) if r is not None]
    D = np.array(rows).reshape(-1, d)
    mean = D.mean(axis=0) if len(rows) else np.zeros(d)
    std = D.std(axis=0, ddof=1) if len(rows) > 1 else np.zeros(d)
    scores = np.divide(mean, std, out=np.zeros(d), where=std > 0)
    return ImportanceReport(data.feature_names, scores, mean_delta=mean, std_delta=std)


def select_features(report: ImportanceReport, threshold: float = 0.1) -> list[str]:
    """Names whose score is strictly above ``threshold``, in report order."""
    return [name for name, s in zip(report.feature_names, report.scores) if s > threshold]
