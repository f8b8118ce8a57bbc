import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from costboost.dataset import (
    DISLIKE,
    FAVOR,
    BinaryDataset,
    SurveyTable,
    binarize,
    dumps_dataset,
    imbalance_profile,
    load_dataset,
    load_survey_csv,
    read_dataset,
    stratified_holdout,
    stratified_kfold,
    synth_survey,
    write_dataset,
    write_survey_csv,
)
from costboost.errors import (
    DegenerateDistribution,
    EmptyDataset,
    InvalidFraction,
    MalformedHeader,
    MalformedRow,
    MissingTargetColumn,
    TooFewSamples,
    ValueOutOfRange,
    VersionMismatch,
)


def write(tmp_path, text, name="s.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_survey_missing_cells(tmp_path):
    p = write(tmp_path, "a,b,Comedy\n1,2,5\n3,,4\n,5,1\n")
    t = load_survey_csv(p, "Comedy")
    assert t.column_names == ("a", "b", "Comedy")
    assert t.rows == [(1, 2, 5), (3, None, 4), (None, 5, 1)]


def test_load_survey_out_of_range_names_row_and_column(tmp_path):
    p = write(tmp_path, "a,b\n1,2\n3,7\n")
    with pytest.raises(ValueOutOfRange) as exc:
        load_survey_csv(p)
    assert exc.value.row == 2 and exc.value.column == "b"


def test_load_survey_errors(tmp_path):
    with pytest.raises(MalformedHeader):
        load_survey_csv(write(tmp_path, ""))
    with pytest.raises(MalformedHeader):
        load_survey_csv(write(tmp_path, "a,a\n1,2\n"))
    with pytest.raises(MalformedRow):
        load_survey_csv(write(tmp_path, "a,b\n1,2,3\n"))
    with pytest.raises(MissingTargetColumn):
        load_survey_csv(write(tmp_path, "a,b\n1,2\n"), "Comedy")
    with pytest.raises(ValueOutOfRange):
        load_survey_csv(write(tmp_path, "a\n2.5\n"))


def test_binarize_threshold_and_listwise_deletion():
    t = SurveyTable(("a", "g"), np.array([[1, 5], [2, 4], [3, 3], [np.nan, 5], [4, np.nan]]))
    d = binarize(t, "g")
    assert d.labels.tolist() == [FAVOR, FAVOR, DISLIKE]
    assert d.n_dropped == 2
    d3 = binarize(t, "g", threshold=3)
    assert d3.labels.tolist() == [FAVOR, FAVOR, FAVOR]
    with pytest.raises(ValueError):
        binarize(t, "g", threshold=6)
    with pytest.raises(MissingTargetColumn):
        binarize(t, "nope")


def test_binarize_all_rows_missing():
    t = SurveyTable(("a", "g"), np.array([[np.nan, 5.0]]))
    with pytest.raises(EmptyDataset):
        binarize(t, "g")


def test_imbalance_profile_counts_and_ratio():
    t = SurveyTable.from_counts("Comedy", (2, 20, 77, 220, 571))
    p = imbalance_profile(t, "Comedy")
    assert (p.dislike_count, p.favor_count) == (99, 791)
    assert p.minority_class == DISLIKE
    assert p.ratio == pytest.approx(791 / 99)


def test_imbalance_profile_degenerate_warns():
    t = SurveyTable.from_counts("g", (0, 0, 0, 3, 4))
    with pytest.warns(DegenerateDistribution):
        p = imbalance_profile(t, "g")
    assert p.degenerate and math.isinf(p.ratio)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.sampled_from([-1, 1]), min_size=10, max_size=120),
    st.integers(2, 6),
    st.integers(0, 10_000),
)
def test_stratified_kfold_properties(labels, k, seed):
    labels = np.array(labels)
    d = BinaryDataset(("x",), np.zeros((labels.size, 1)), labels)
    if min(d.class_counts()) < k:
        with pytest.raises(TooFewSamples):
            stratified_kfold(d, k, seed)
        return
    plan = stratified_kfold(d, k, seed)
    sizes = np.bincount(plan.fold_assignment, minlength=k)
    assert sizes.max() - sizes.min() <= 1
    for c in (DISLIKE, FAVOR):
        per = np.bincount(plan.fold_assignment[labels == c], minlength=k)
        assert per.max() - per.min() <= 1
    seen = np.concatenate([test for _, test in plan.folds()])
    assert sorted(seen.tolist()) == list(range(labels.size))
    again = stratified_kfold(d, k, seed)
    assert np.array_equal(plan.fold_assignment, again.fold_assignment)


def test_stratified_holdout_keeps_classes():
    y = np.array([1] * 80 + [-1] * 20)
    tr, va = stratified_holdout(y, 0.2, 5)
    assert np.intersect1d(tr, va).size == 0 and tr.size + va.size == 100
    assert (y[va] == 1).sum() == 16 and (y[va] == -1).sum() == 4


def test_synth_survey_shape_and_balance():
    d = synth_survey(300, 0.8, 4, informative=(0,), seed=2)
    assert d.class_counts() == (60, 240)
    assert set(np.unique(d.features)) <= {1, 2, 3, 4, 5}
    fav = d.features[d.labels == FAVOR, 0].mean()
    dis = d.features[d.labels == DISLIKE, 0].mean()
    assert fav > dis + 1
    assert np.array_equal(d.features, synth_survey(300, 0.8, 4, informative=(0,), seed=2).features)
    with pytest.raises(InvalidFraction):
        synth_survey(10, 1.0, 2)


def test_dataset_file_round_trip(tmp_path, small_data):
    p = write_dataset(small_data, tmp_path / "d.csv")
    back = read_dataset(p)
    assert back.feature_names == small_data.feature_names
    assert np.array_equal(back.features, small_data.features)
    assert np.array_equal(back.labels, small_data.labels)
    assert dumps_dataset(back) == p.read_text()
    assert np.array_equal(load_dataset(p, "target").labels, small_data.labels)
    with pytest.raises(MissingTargetColumn):
        load_dataset(p, "Comedy")


def test_dataset_file_version_checked(tmp_path, small_data):
    text = dumps_dataset(small_data).replace("v1", "v9", 1)
    with pytest.raises(VersionMismatch):
        read_dataset(write(tmp_path, text))


def test_survey_csv_round_trip(tmp_path):
    t = SurveyTable(("a", "b"), np.array([[1, np.nan], [5, 3]]))
    p = write_survey_csv(t, tmp_path / "s.csv")
    assert load_survey_csv(p).rows == t.rows


def test_immutability(small_data):
    with pytest.raises(ValueError):
        small_data.features[0, 0] = 3
