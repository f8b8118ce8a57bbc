import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from costboost.errors import AllWeightsZero, DimensionMismatch, EmptyDataset
from costboost.tree import (
    STUMP,
    Tree,
    TreeParams,
    fit_classification_arrays,
    fit_regression_arrays,
    predict_tree,
)

from oracles import brute_force_root_split, random_split_battery


def root_split(tree: Tree):
    if tree.feature[0] < 0:
        return None
    return int(tree.feature[0]), float(tree.threshold[0])


def test_root_split_matches_brute_force():
    rng = np.random.default_rng(0)
    for X, y, w in random_split_battery(rng, 300):
        tree = fit_classification_arrays(X, y, w, STUMP)
        assert root_split(tree) == brute_force_root_split(X, y, w)


def test_tie_goes_to_lowest_threshold():
    X = np.arange(1.0, 7.0).reshape(-1, 1)
    y = np.array([1, 1, -1, 1, -1, -1])
    tree = fit_classification_arrays(X, y, None, STUMP)
    assert root_split(tree) == (0, 2.5)


def test_tie_goes_to_lowest_feature():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    tree = fit_classification_arrays(X, np.array([-1, 1]), None, STUMP)
    assert root_split(tree) == (0, 0.5)


def test_tied_leaf_predicts_dislike():
    X = np.zeros((2, 1))
    tree = fit_classification_arrays(X, np.array([-1, 1]), None, STUMP)
    assert tree.n_nodes == 1 and tree.predict(X).tolist() == [-1, -1]


def test_zero_weight_rows_are_ignored():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([-1, -1, 1, 1])
    base = fit_classification_arrays(X, y, np.array([1.0, 1.0, 1.0, 1.0]), STUMP)
    # a zero-weight row at a new location must not move the threshold
    X2 = np.vstack([X, [[1.8]]])
    y2 = np.append(y, 1)
    t2 = fit_classification_arrays(X2, y2, np.array([1.0, 1.0, 1.0, 1.0, 0.0]), STUMP)
    assert root_split(t2) == root_split(base) == (0, 1.5)


def test_min_leaf_weight_blocks_small_leaves():
    X = np.arange(10.0).reshape(-1, 1)
    y = np.array([1] + [-1] * 9)
    free = fit_classification_arrays(X, y, None, TreeParams(max_depth=1, min_leaf_weight=1.0))
    assert root_split(free) == (0, 0.5)
    blocked = fit_classification_arrays(X, y, None, TreeParams(max_depth=1, min_leaf_weight=2.0))
    assert root_split(blocked) != (0, 0.5)


def test_regression_stump_leaf_values():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    t = np.array([1.0, -1.0, 1.0, 1.0])
    w = np.array([3.0, 1.0, 1.0, 1.0])
    tree = fit_regression_arrays(X, t, w, STUMP)
    assert tree.predict(np.array([[0.0], [1.0]])).tolist() == pytest.approx([0.5, 1.0])


def test_input_errors():
    with pytest.raises(EmptyDataset):
        fit_classification_arrays(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(DimensionMismatch):
        fit_classification_arrays(np.zeros((3, 1)), np.ones(3), np.ones(2))
    with pytest.raises(AllWeightsZero):
        fit_classification_arrays(np.zeros((3, 1)), np.ones(3), np.zeros(3))
    with pytest.raises(ValueError):
        fit_classification_arrays(np.zeros((3, 1)), np.ones(3), -np.ones(3))
    tree = fit_classification_arrays(np.zeros((2, 2)), np.array([1, 1]))
    with pytest.raises(DimensionMismatch):
        tree.predict(np.zeros((1, 3)))


data_strategy = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, (n, 3), elements=st.integers(1, 5).map(float)),
        arrays(np.int64, n, elements=st.sampled_from([-1, 1])),
        arrays(np.float64, n, elements=st.floats(0.01, 10.0)),
    )
)


@settings(max_examples=80, deadline=None)
@given(data_strategy, st.integers(1, 6))
def test_tree_structure_invariants(data, depth):
    X, y, w = data
    tree = fit_classification_arrays(X, y, w, TreeParams(max_depth=depth, min_leaf_weight=1e-6))
    assert tree.depth() <= depth
    pred = tree.predict(X)
    assert set(np.unique(pred)) <= {-1, 1}
    for i in range(tree.n_nodes):
        if tree.feature[i] >= 0:
            assert 0 < tree.left[i] < tree.n_nodes and 0 < tree.right[i] < tree.n_nodes
    assert [predict_tree(tree, row) for row in X] == pred.tolist()
    assert Tree.from_dict(tree.to_dict()).to_dict() == tree.to_dict()


@settings(max_examples=60, deadline=None)
@given(data_strategy, st.sampled_from([0.25, 2.0, 8.0]))
def test_weight_scaling_gives_same_tree(data, s):
    X, y, w = data
    a = fit_classification_arrays(X, y, w, TreeParams(max_depth=4, min_leaf_weight=1e-6))
    b = fit_classification_arrays(X, y, w * s, TreeParams(max_depth=4, min_leaf_weight=1e-6))
    assert a.to_dict() == b.to_dict()


@settings(max_examples=60, deadline=None)
@given(data_strategy)
def test_deep_tree_fits_consistent_data(data):
    X, y, w = data
    # make labels a function of X so a pure fit exists
    y = np.where(X[:, 0] + 2 * X[:, 1] + 4 * X[:, 2] > 20, 1, -1)
    tree = fit_classification_arrays(X, y, w, TreeParams(max_depth=30, min_leaf_weight=1e-9))
    assert np.array_equal(tree.predict(X), y)


@settings(max_examples=60, deadline=None)
@given(data_strategy)
def test_regression_leaves_clamped(data):
    X, _, w = data
    t = np.linspace(-3, 3, X.shape[0])
    tree = fit_regression_arrays(X, t, w, TreeParams(max_depth=3, min_leaf_weight=1e-6))
    out = tree.predict(X)
    assert np.all(out >= -1) and np.all(out <= 1)
