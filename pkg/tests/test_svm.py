import warnings

import numpy as np
import pytest

from costboost.boosting import CostMatrix
from costboost.dataset import BinaryDataset, synth_survey
from costboost.errors import InvalidCostMatrix, NonConvergence, SingleClassData
from costboost.svm import class_boxes, fit_linear_svm, predict_svm, smo

from oracles import brute_force_svm_dual


def test_two_points():
    d = BinaryDataset(("x",), np.array([[-1.0], [1.0]]), np.array([-1, 1]))
    m = fit_linear_svm(d, c=10.0, tol=1e-9)
    assert m.weight_vector == pytest.approx([1.0])
    assert m.bias == pytest.approx(0.0, abs=1e-9)
    assert m.dual == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("c", [0.1, 1.0, 10.0])
def test_dual_matches_qp(seed, c):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((10, 3))
    y = np.where(Z[:, 0] + 0.7 * rng.standard_normal(10) > 0, 1.0, -1.0)
    y[:2] = [1.0, -1.0]
    box = np.where(y > 0, c, 2 * c)
    a, w, b, gap, _ = smo(Z, y, box, tol=1e-8, max_iter=100_000)
    obj = a.sum() - 0.5 * w @ w
    _, ref = brute_force_svm_dual(Z, y, box)
    assert obj == pytest.approx(ref, abs=1e-6)
    assert np.all(a >= 0) and np.all(a <= box)
    assert abs(a @ y) < 1e-9


def test_class_boxes():
    assert class_boxes(2.0, None) == (2.0, 2.0)
    assert class_boxes(2.0, CostMatrix([[0, 5], [1, 0]])) == (2.0, 10.0)
    with pytest.raises(InvalidCostMatrix):
        class_boxes(1.0, CostMatrix([[0, 0], [1, 0]]))


def test_single_class_rejected():
    d = BinaryDataset(("x",), np.zeros((3, 1)), np.ones(3, dtype=int))
    with pytest.raises(SingleClassData):
        fit_linear_svm(d)


def test_nonconvergence_warns():
    d = synth_survey(200, 0.5, 4, informative=(0,), noise_level=2.0, seed=0)
    with pytest.warns(NonConvergence):
        m = fit_linear_svm(d, c=100.0, tol=1e-12, max_passes=1)
    assert not m.converged


def test_constant_feature_and_prediction():
    d = synth_survey(150, 0.6, 3, informative=(0,), seed=1).with_column("k", np.full(150, 2.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonConvergence)
        m = fit_linear_svm(d)
    assert m.weight_vector[-1] == 0.0
    err = np.mean(m.predict(d.features) != d.labels)
    assert err < 0.25
    assert predict_svm(m, d.features[0]) == m.predict(d.features[:1])[0]
    assert m.training_kkt_residual < 1e-3
