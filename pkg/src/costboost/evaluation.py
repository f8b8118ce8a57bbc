"""Confusion matrices, precision/recall, stratified cross-validation, cost
sweeps and algorithm comparisons."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from costboost.bagging import fit_bagged
from costboost.boosting import CostMatrix, EarlyStopSpec, fit_adaboost_m1, fit_gentleboost
from costboost.dataset import DISLIKE, FAVOR, BinaryDataset, stratified_kfold
from costboost.errors import EmptyInput, LengthMismatch
from costboost.svm import fit_linear_svm
from costboost.tree import TreeParams

ALGORITHMS = ("adaboost", "gentleboost", "bagging", "svm", "majority")

# symmetric, then 5x and 2x penalty on calling a disliker a fan
DEFAULT_SWEEP = (
    CostMatrix(((0, 1), (1, 0))),
    CostMatrix(((0, 5), (1, 0))),
    CostMatrix(((0, 2), (1, 0))),
)
COMPARE_COST = CostMatrix(((0, 5), (1, 0)))


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[true][predicted]`` with index 0 = dislike, 1 = favor."""

    counts: tuple

    def __post_init__(self):
        c = tuple(tuple(int(v) for v in row) for row in self.counts)
        if len(c) != 2 or any(len(r) != 2 for r in c) or any(v < 0 for r in c for v in r):
            raise ValueError(f"confusion counts must be a nonnegative 2x2 table, got {self.counts}")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return sum(sum(r) for r in self.counts)

    @property
    def row_sums(self) -> tuple[int, int]:
        return sum(self.counts[0]), sum(self.counts[1])

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.counts, other.counts))
        )

    def to_list(self) -> list:
        return [list(r) for r in self.counts]


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    accuracy: float
    error: float
    positive_class: int = FAVOR
    degenerate: tuple = ()


def _index(label: int) -> int:
    return 0 if label == DISLIKE else 1


def confusion(predictions, truth) -> ConfusionMatrix:
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise LengthMismatch(f"{predictions.size} predictions for {truth.size} labels")
    if truth.size == 0:
        raise EmptyInput("no predictions to tabulate")
    counts = [
        [int(np.sum((truth == t) & (predictions == p))) for p in (DISLIKE, FAVOR)]
        for t in (DISLIKE, FAVOR)
    ]
    return ConfusionMatrix(counts)


def metrics(cm: ConfusionMatrix, positive_class: int = FAVOR, exact: bool = False) -> Metrics:
    """Precision, recall and accuracy for ``positive_class``.

    A zero denominator yields 0 and the metric's name in ``degenerate``.
    With ``exact=True`` every value is a :class:`fractions.Fraction`.
    """
    total = cm.total
    if total == 0:
        raise EmptyInput("confusion matrix is empty")
    p = _index(positive_class)
    q = 1 - p
    tp, fp, fn = cm.counts[p][p], cm.counts[q][p], cm.counts[p][q]
    correct = cm.counts[0][0] + cm.counts[1][1]

    degenerate = []

    def ratio(num, den, name):
        if den == 0:
            degenerate.append(name)
            return Fraction(0)
        return Fraction(num, den)

    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    accuracy = Fraction(correct, total)
    error = 1 - accuracy
    vals = (precision, recall, accuracy, error)
    if not exact:
        vals = tuple(float(v) for v in vals)
    return Metrics(*vals, positive_class=positive_class, degenerate=tuple(degenerate))


# --------------------------------------------------------------------------
# learners

class MajorityClassifier:
    """Predicts the training majority (dislike on a tie)."""

    def __init__(self, label: int):
        self.label = label

    def predict(self, X):
        return np.full(np.asarray(X).shape[0], self.label)

    def decision_function(self, X):
        return np.full(np.asarray(X).shape[0], float(self.label))


@dataclass(frozen=True)
class LearnerSpec:
    """Algorithm name, its keyword parameters and the cost matrix to train with.

    Boosting params: ``max_rounds`` (200), ``max_depth`` (3), ``early_stop``
    (True).  Bagging: ``n_trees`` (400), ``max_depth`` (30),
    ``min_leaf_weight`` (1.0).  SVM: ``c`` (1.0), ``tol``, ``max_passes``.
    """

    algorithm: str
    cost: CostMatrix | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")

    def resolved_params(self) -> dict:
        p = dict(self.params)
        if self.algorithm in ("adaboost", "gentleboost"):
            p.setdefault("max_rounds", 200)
            p.setdefault("max_depth", 3)
            p.setdefault("early_stop", True)
        elif self.algorithm == "bagging":
            p.setdefault("n_trees", 400)
            p.setdefault("max_depth", 30)
            p.setdefault("min_leaf_weight", 1.0)
            p.setdefault("n_jobs", 1)
        elif self.algorithm == "svm":
            p.setdefault("c", 1.0)
            p.setdefault("tol", 1e-3)
            p.setdefault("max_passes", 200)
        return p

    def fit(self, data: BinaryDataset, seed: int):
        p = self.resolved_params()
        algo = self.algorithm
        if algo in ("adaboost", "gentleboost"):
            fit = fit_adaboost_m1 if algo == "adaboost" else fit_gentleboost
            stop = EarlyStopSpec() if p["early_stop"] else None
            weak = TreeParams(max_depth=p["max_depth"], min_leaf_weight=1e-6)
            return fit(data, self.cost, p["max_rounds"], weak, stop, seed)
        if algo == "bagging":
            params = TreeParams(max_depth=p["max_depth"], min_leaf_weight=p["min_leaf_weight"])
            return fit_bagged(data, p["n_trees"], params, seed, self.cost, p["n_jobs"])
        if algo == "svm":
            return fit_linear_svm(data, p["c"], self.cost, p["tol"], p["max_passes"])
        dislike, favor = data.class_counts()
        return MajorityClassifier(FAVOR if favor > dislike else DISLIKE)


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


@dataclass(frozen=True)
class CvReport:
    algorithm: str
    error_in_sample: np.ndarray
    error_out_sample: np.ndarray
    pooled: ConfusionMatrix
    predictions: np.ndarray = field(repr=False, default=None)
    fold_assignment: np.ndarray = field(repr=False, default=None)

    @property
    def k(self) -> int:
        return self.error_out_sample.size

    @property
    def mean_in_sample(self) -> float:
        return float(np.mean(self.error_in_sample))

    @property
    def mean_out_sample(self) -> float:
        return float(np.mean(self.error_out_sample))

    @property
    def pooled_out_sample(self) -> float:
        """Held-out error over all rows at once, ``1 - accuracy(pooled)``."""
        return float(metrics(self.pooled).error)


def crossval(
    data: BinaryDataset, spec: LearnerSpec, k: int = 5, seed: int = 42, n_jobs: int = 1
) -> CvReport:
    """Stratified k-fold CV.  In-sample error is each fold's training error."""
    plan = stratified_kfold(data, k, seed)
    folds = list(plan.folds())

    def run(f):
        train, test = folds[f]
        model = spec.fit(data.subset(train), fold_seed(seed, f))
        pin = model.predict(data.features[train])
        pout = model.predict(data.features[test])
        return np.mean(pin != data.labels[train]), np.mean(pout != data.labels[test]), pout

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, range(k)))
    else:
        results = [run(f) for f in range(k)]
    preds = np.zeros(data.n, dtype=np.int64)
    for (train, test), (_, _, pout) in zip(folds, results):
        preds[test] = pout
    return CvReport(
        spec.algorithm,
        np.array([r[0] for r in results]),
        np.array([r[1] for r in results]),
        confusion(preds, data.labels),
        preds,
        plan.fold_assignment,
    )


def cost_sweep(
    data: BinaryDataset,
    algorithms: Sequence[str] = ("gentleboost", "adaboost"),
    costs: Sequence[CostMatrix] = DEFAULT_SWEEP,
    seed: int = 42,
    k: int = 5,
    params: dict | None = None,
) -> dict:
    """Pooled cross-validated confusion matrix per ``(algorithm, cost.tag)``."""
    params = params or {}
    grid = {}
    for algo in algorithms:
        for cost in costs:
            spec = LearnerSpec(algo, cost, params.get(algo, {}))
            grid[(algo, cost.tag)] = crossval(data, spec, k, seed).pooled
    return grid


def compare_algorithms(
    data: BinaryDataset,
    cost: CostMatrix = COMPARE_COST,
    seed: int = 42,
    k: int = 5,
    algorithms: Sequence[str] = ("adaboost", "bagging", "svm"),
    params: dict | None = None,
) -> dict:
    """CvReport per algorithm, all trained under the same cost matrix."""
    params = params or {}
    return {
        algo: crossval(data, LearnerSpec(algo, cost, params.get(algo, {})), k, seed)
        for algo in algorithms
    }
