"""AdaBoost.M1 and GentleBoost with cost-matrix prior weighting.

Costs enter only through the initial observation weights: a row of true
class ``i`` starts with weight proportional to the cost of misclassifying
it, ``C[i, other]``.  Every later round is the plain cost-free update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from costboost.dataset import DISLIKE, FAVOR, BinaryDataset, stratified_holdout
from costboost.errors import (
    DimensionMismatch,
    EmptyEnsemble,
    InvalidCostMatrix,
    LengthMismatch,
    SingleClassData,
    WeakLearnerFailure,
)
from costboost.tree import (
    WEAK_TREE,
    Tree,
    TreeParams,
    fit_classification_arrays,
    fit_regression_arrays,
)

ADABOOST = "adaboost-m1"
GENTLEBOOST = "gentleboost"

EPS_CLAMP = 1e-10


@dataclass(frozen=True)
class CostMatrix:
    """2x2 misclassification costs, ``c[true][predicted]`` over (dislike, favor)."""

    c: tuple

    def __post_init__(self):
        try:
            c = tuple(tuple(float(v) for v in row) for row in self.c)
        except (TypeError, ValueError) as exc:
            raise InvalidCostMatrix(f"cost matrix must be 2x2 numbers: {exc}") from None
        if len(c) != 2 or any(len(row) != 2 for row in c):
            raise InvalidCostMatrix("cost matrix must be 2x2")
        if any(not math.isfinite(v) or v < 0 for row in c for v in row):
            raise InvalidCostMatrix(f"cost entries must be finite and nonnegative: {c}")
        if c[0][0] != 0 or c[1][1] != 0:
            raise InvalidCostMatrix(f"diagonal costs must be 0: {c}")
        if c[0][1] <= 0 and c[1][0] <= 0:
            raise InvalidCostMatrix("at least one off-diagonal cost must be positive")
        object.__setattr__(self, "c", c)

    @classmethod
    def uniform(cls) -> "CostMatrix":
        return cls(((0, 1), (1, 0)))

    @classmethod
    def parse(cls, text: str) -> "CostMatrix":
        """Four comma-separated numbers, row-major, true-dislike row first."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise InvalidCostMatrix(f"expected 4 comma-separated costs, got {text!r}")
        try:
            a, b, c, d = (float(p) for p in parts)
        except ValueError:
            raise InvalidCostMatrix(f"non-numeric cost in {text!r}") from None
        return cls(((a, b), (c, d)))

    @property
    def false_favor(self) -> float:
        """Cost of predicting favor for a true dislike."""
        return self.c[0][1]

    @property
    def false_dislike(self) -> float:
        """Cost of predicting dislike for a true favor."""
        return self.c[1][0]

    def scaled(self, s: float) -> "CostMatrix":
        return CostMatrix(tuple(tuple(s * v for v in row) for row in self.c))

    def class_weights(self) -> tuple[float, float]:
        """Per-class prior multipliers ``(dislike, favor)``, largest equal to 1.

        The smaller ratio is rounded to 12 significant digits so that a
        rescaled matrix, whose quotient may be off by an ulp, yields the
        same multipliers bit for bit.
        """
        top = max(self.false_favor, self.false_dislike)
        ratio = lambda v: float(f"{v / top:.12g}")
        return ratio(self.false_favor), ratio(self.false_dislike)

    @property
    def tag(self) -> str:
        return ",".join(_num(v) for row in self.c for v in row)

    def to_list(self) -> list:
        return [list(row) for row in self.c]


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class EarlyStopSpec:
    patience: int = 20
    min_delta: float = 0.0
    validation_fraction: float = 0.2

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.min_delta < 0:
            raise ValueError("min_delta must be >= 0")
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation_fraction must be in (0, 1)")


@dataclass(frozen=True)
class BoostState:
    """Snapshot after one round; ``weights`` are the renormalized post-update weights."""

    round: int
    weights: np.ndarray
    learner: Tree
    eps: float
    alpha: float
    learner_output: np.ndarray


@dataclass(frozen=True)
class BoostedEnsemble:
    weak_learners: tuple
    alphas: np.ndarray
    algorithm: str
    cost: CostMatrix
    feature_names: tuple = ()
    eps_history: tuple = ()
    validation_losses: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weak_learners", tuple(self.weak_learners))
        a = np.array(self.alphas, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        if a.size != len(self.weak_learners):
            raise ValueError("one alpha per weak learner required")

    @property
    def rounds_used(self) -> int:
        return len(self.weak_learners)

    @property
    def n_features(self) -> int:
        return len(self.feature_names) if self.feature_names else self.weak_learners[0].n_features

    def decision_function(self, X, rounds: int | None = None) -> np.ndarray:
        """Score ``sum_m alpha_m k_m(x)`` over the first ``rounds`` learners."""
        if not self.weak_learners:
            raise EmptyEnsemble("ensemble has no weak learners")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.weak_learners[0].n_features:
            raise DimensionMismatch(
                f"model expects {self.weak_learners[0].n_features} features, got {X.shape[1]}"
            )
        score = np.zeros(X.shape[0])
        for a, learner in zip(self.alphas[:rounds], self.weak_learners[:rounds]):
            score += a * learner.predict(X)
        return score

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) > 0, FAVOR, DISLIKE)

    def truncated(self, rounds: int) -> "BoostedEnsemble":
        return BoostedEnsemble(
            self.weak_learners[:rounds],
            self.alphas[:rounds],
            self.algorithm,
            self.cost,
            self.feature_names,
            self.eps_history[:rounds],
            self.validation_losses,
            self.params,
        )


# --------------------------------------------------------------------------
# the round primitives

def init_weights(data, cost: CostMatrix | None = None) -> np.ndarray:
    """Initial observation weights ``w_i ~ C[y_i, other]``, summing to 1.

    Scaling the cost matrix by any positive number gives bit-identical
    weights because costs are first normalized by their largest entry.
    """
    labels = data.labels if isinstance(data, BinaryDataset) else np.asarray(data)
    cost = cost or CostMatrix.uniform()
    if not (np.any(labels == DISLIKE) and np.any(labels == FAVOR)):
        raise SingleClassData("boosting needs both classes present")
    w_dislike, w_favor = cost.class_weights()
    if w_dislike == 0 or w_favor == 0:
        raise InvalidCostMatrix(
            "boosting needs both off-diagonal costs positive so every weight stays positive"
        )
    raw = np.where(labels == DISLIKE, w_dislike, w_favor)
    return raw / raw.sum()


def round_error(weights, predictions, labels) -> float:
    weights = np.asarray(weights, dtype=float)
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if not (weights.shape == predictions.shape == labels.shape):
        raise LengthMismatch(
            f"lengths differ: weights {weights.shape}, predictions {predictions.shape}, labels {labels.shape}"
        )
    return float(weights[predictions != labels].sum() / weights.sum())


def alpha(eps: float) -> float:
    eps = min(max(eps, EPS_CLAMP), 1.0 - EPS_CLAMP)
    return 0.5 * math.log((1.0 - eps) / eps)


def early_stop_check(history: Sequence[float], spec: EarlyStopSpec) -> int | None:
    """Return the 1-based best round to truncate to, or None to keep going.

    Stops once the loss has failed to beat the best so far by more than
    ``min_delta`` for ``patience`` consecutive rounds.
    """
    best = math.inf
    best_round = 0
    stale = 0
    for m, loss in enumerate(history, start=1):
        if loss < best - spec.min_delta:
            best, best_round, stale = loss, m, 0
        else:
            stale += 1
            if stale >= spec.patience:
                return best_round
    return None


def _renormalize(w):
    return w / w.sum()


def iter_adaboost(X, y, w0, max_rounds: int, params: TreeParams = WEAK_TREE) -> Iterator[BoostState]:
    """Run AdaBoost.M1 rounds, yielding the state after each kept round.

    Stops without yielding when a weak learner is no better than chance and
    stops after yielding when one is perfect.
    """
    w = np.asarray(w0, dtype=float).copy()
    for m in range(1, max_rounds + 1):
        learner = fit_classification_arrays(X, y, w, params)
        k = learner.predict(X)
        eps = round_error(w, k, y)
        if eps >= 0.5:
            return
        a = alpha(eps)
        w = _renormalize(w * np.exp(-a * y * k))
        yield BoostState(m, w, learner, eps, a, k)
        if eps <= EPS_CLAMP:
            return


def iter_gentleboost(X, y, w0, max_rounds: int, params: TreeParams = WEAK_TREE) -> Iterator[BoostState]:
    """Gentle AdaBoost: weighted least-squares trees on the +-1 labels.

    Each learner's clamped leaf means are added to the score directly; the
    weights then follow ``w <- w exp(-y f(x))``.
    """
    w = np.asarray(w0, dtype=float).copy()
    yf = y.astype(float)
    for m in range(1, max_rounds + 1):
        learner = fit_regression_arrays(X, yf, w, params)
        f = learner.predict(X)
        eps = round_error(w, np.where(f > 0, FAVOR, DISLIKE), y)
        w = _renormalize(w * np.exp(-yf * f))
        yield BoostState(m, w, learner, eps, 1.0, f)
        if not np.any(f):
            # a zero learner leaves the weights unchanged; later rounds would repeat it
            return


def _exp_loss(score, labels, weights) -> float:
    return float(np.dot(weights, np.exp(-labels * score)))


def _fit(algorithm, data, cost, max_rounds, weak_params, stop, seed, validation):
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    cost = cost or CostMatrix.uniform()
    train = data
    if stop is not None and validation is None:
        tr, va = stratified_holdout(data.labels, stop.validation_fraction, seed)
        train, validation = data.subset(tr), data.subset(va)
    X, y = train.features, train.labels
    w0 = init_weights(train, cost)
    rounds = iter_adaboost if algorithm == ADABOOST else iter_gentleboost

    learners, alphas, epss, losses = [], [], [], []
    if stop is not None:
        vw = init_weights(validation, cost)
        vscore = np.zeros(validation.n)
    best = None
    try:
        for state in rounds(X, y, w0, max_rounds, weak_params):
            learners.append(state.learner)
            alphas.append(state.alpha)
            epss.append(state.eps)
            if stop is not None:
                vscore += state.alpha * state.learner.predict(validation.features)
                losses.append(_exp_loss(vscore, validation.labels, vw))
                best = early_stop_check(losses, stop)
                if best is not None:
                    break
    except ValueError as exc:
        raise WeakLearnerFailure(f"weak learner fit failed: {exc}") from exc
    if not learners:
        raise WeakLearnerFailure("first weak learner was no better than chance")
    if stop is not None and best is None:
        best = int(np.argmin(losses)) + 1
    params = {
        "max_rounds": max_rounds,
        "weak_params": weak_params.to_dict(),
        "seed": seed,
        "early_stop": None
        if stop is None
        else {
            "patience": stop.patience,
            "min_delta": stop.min_delta,
            "validation_fraction": stop.validation_fraction,
        },
    }
    ens = BoostedEnsemble(
        learners, alphas, algorithm, cost, data.feature_names, tuple(epss), tuple(losses), params
    )
    return ens if best is None else ens.truncated(best)


def fit_adaboost_m1(
    data: BinaryDataset,
    cost: CostMatrix | None = None,
    max_rounds: int = 200,
    weak_params: TreeParams = WEAK_TREE,
    stop: EarlyStopSpec | None = None,
    seed: int = 42,
    validation: BinaryDataset | None = None,
) -> BoostedEnsemble:
    """Cost-sensitive AdaBoost.M1 with shallow classification trees.

    With ``stop`` set, a stratified slice of ``data`` (or the given
    ``validation`` set) tracks the cost-weighted exponential loss and the
    ensemble is cut back to its best round.  ``seed`` only drives that split.
    """
    return _fit(ADABOOST, data, cost, max_rounds, weak_params, stop, seed, validation)


def fit_gentleboost(
    data: BinaryDataset,
    cost: CostMatrix | None = None,
    max_rounds: int = 200,
    weak_params: TreeParams = WEAK_TREE,
    stop: EarlyStopSpec | None = None,
    seed: int = 42,
    validation: BinaryDataset | None = None,
) -> BoostedEnsemble:
    return _fit(GENTLEBOOST, data, cost, max_rounds, weak_params, stop, seed, validation)


def predict_boosted(ensemble: BoostedEnsemble, row) -> int:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict_boosted takes a single feature vector")
    return int(ensemble.predict(row)[0])
