"""Linear soft-margin SVM baseline solved by SMO on the dual.

Per-class box constraints carry the cost matrix: favor rows get ``C`` and
dislike rows get ``C * cost[dislike, favor] / cost[favor, dislike]``.
Features are standardized internally; constant features stay at zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from costboost.boosting import CostMatrix
from costboost.dataset import DISLIKE, FAVOR, BinaryDataset
from costboost.errors import DimensionMismatch, InvalidCostMatrix, NonConvergence, SingleClassData


@dataclass(frozen=True)
class SvmModel:
    weight_vector: np.ndarray
    bias: float
    c_pos: float
    c_neg: float
    training_kkt_residual: float
    mean: np.ndarray
    scale: np.ndarray
    dual: np.ndarray
    converged: bool = True
    n_iter: int = 0
    feature_names: tuple = ()

    @property
    def dual_objective(self) -> float:
        """``sum(a) - |w|^2 / 2`` in the standardized space."""
        return float(self.dual.sum() - 0.5 * np.dot(self.weight_vector, self.weight_vector))

    def standardize(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.weight_vector.size:
            raise DimensionMismatch(f"model expects {self.weight_vector.size} features, got {X.shape[1]}")
        return (X - self.mean) / self.scale

    def decision_function(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weight_vector + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) > 0, FAVOR, DISLIKE)


def standardization(X) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # constant columns centre to 0 and stay there
    return mean, np.where(std > 0, std, 1.0)


def class_boxes(c: float, cost: CostMatrix | None) -> tuple[float, float]:
    """``(c_pos, c_neg)`` for a base penalty ``c`` and a cost matrix."""
    if cost is None:
        return c, c
    if cost.false_dislike <= 0 or cost.false_favor <= 0:
        raise InvalidCostMatrix("SVM class penalties need both off-diagonal costs positive")
    w_dislike, w_favor = cost.class_weights()
    return c, c * (w_dislike / w_favor)


def smo(Z, y, box, tol=1e-3, max_iter=100_000):
    """Maximal-violating-pair SMO for the linear-kernel dual.

    Returns ``(alpha, w, bias, kkt_gap, n_iter)``.  The KKT gap is
    ``max_{I_up} -y G - min_{I_low} -y G`` with ``G = Q alpha - 1``.
    """
    n = y.size
    a = np.zeros(n)
    w = np.zeros(Z.shape[1])
    G = -np.ones(n)
    sq = np.einsum("ij,ij->i", Z, Z)
    pos = y > 0
    gap = np.inf
    it = 0
    while True:
        up = np.where(pos, a < box, a > 0)
        low = np.where(pos, a > 0, a < box)
        score = -y * G
        su = np.where(up, score, -np.inf)
        sl = np.where(low, score, np.inf)
        i = int(np.argmax(su))
        j = int(np.argmin(sl))
        gap = su[i] - sl[j]
        if gap < tol or it >= max_iter:
            break
        it += 1
        # move a_i += y_i t, a_j -= y_j t; keeps sum(y a) fixed
        eta = sq[i] + sq[j] - 2.0 * np.dot(Z[i], Z[j])
        t = gap / eta if eta > 1e-12 else np.inf
        t = min(
            t,
            box[i] - a[i] if y[i] > 0 else a[i],
            a[j] if y[j] > 0 else box[j] - a[j],
        )
        a[i] += y[i] * t
        a[j] -= y[j] * t
        a[i] = min(max(a[i], 0.0), box[i])
        a[j] = min(max(a[j], 0.0), box[j])
        dz = Z[i] - Z[j]
        w += t * dz
        G += t * y * (Z @ dz)
    score = -y * G
    free = (a > 0) & (a < box)
    if free.any():
        bias = float(score[free].mean())
    else:
        up = np.where(pos, a < box, a > 0)
        low = np.where(pos, a > 0, a < box)
        bias = float((score[up].max() + score[low].min()) / 2.0)
    # recompute w from the duals to shed accumulated drift
    w = (a * y) @ Z
    return a, w, bias, float(gap), it


def fit_linear_svm(
    data: BinaryDataset,
    c: float = 1.0,
    cost: CostMatrix | None = None,
    tol: float = 1e-3,
    max_passes: int = 200,
) -> SvmModel:
    """Fit the class-weighted soft-margin linear SVM.

    ``max_passes`` caps SMO at ``max_passes * n`` pair updates; hitting the
    cap emits :class:`NonConvergence` and still returns the model.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    y = data.labels.astype(float)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassData("SVM needs both classes present")
    c_pos, c_neg = class_boxes(c, cost)
    mean, scale = standardization(data.features)
    Z = (data.features - mean) / scale
    box = np.where(y > 0, c_pos, c_neg)
    a, w, b, gap, it = smo(Z, y, box, tol, max_passes * data.n)
    converged = gap < tol
    if not converged:
        warnings.warn(
            f"SMO stopped after {it} updates with KKT gap {gap:.3g} >= tol {tol}",
            NonConvergence,
            stacklevel=2,
        )
    return SvmModel(w, b, c_pos, c_neg, gap, mean, scale, a, converged, it, data.feature_names)


def predict_svm(model: SvmModel, row) -> int:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict_svm takes a single feature vector")
    return int(model.predict(row)[0])
