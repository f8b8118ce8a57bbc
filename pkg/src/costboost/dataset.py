"""Survey ingestion, binary targets, imbalance profiling, stratified folds and
a synthetic survey generator.

Ordinal survey answers live on a 1-5 scale (1 hate ... 5 love).  A respondent
*favors* a genre when the answer reaches ``threshold`` (4 by default) and
*dislikes* it otherwise.  Labels are encoded as -1 (dislike) and +1 (favor)
everywhere in the package.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from costboost._io import atomic_write_text, fmt_float
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

DISLIKE = -1
FAVOR = 1
SCALE = (1, 2, 3, 4, 5)

DATASET_MAGIC = "# costboost-dataset"
DATASET_VERSION = 1


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SurveyTable:
    """Raw ordinal responses.  Missing cells are stored as NaN."""

    column_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "column_names", tuple(self.column_names))
        values = _frozen(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.column_names):
            raise MalformedRow(
                f"expected {len(self.column_names)} cells per row, "
                f"got array of shape {values.shape}"
            )
        present = values[~np.isnan(values)]
        if present.size and (
            np.any(present < 1) or np.any(present > 5) or np.any(present != np.round(present))
        ):
            bad = np.argwhere(~np.isnan(values) & ((values < 1) | (values > 5) | (values != np.round(values))))[0]
            raise ValueOutOfRange(int(bad[0]) + 1, self.column_names[bad[1]], values[bad[0], bad[1]])
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def rows(self) -> list[tuple[int | None, ...]]:
        return [
            tuple(None if math.isnan(v) else int(v) for v in row) for row in self.values
        ]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.column_names.index(name)
        except ValueError:
            raise MissingTargetColumn(f"column {name!r} not in table") from None
        return self.values[:, j]

    @classmethod
    def from_counts(cls, column: str, counts: Sequence[int]) -> "SurveyTable":
        """Single-column table holding ``counts[s-1]`` answers of each scale value ``s``."""
        vals = np.repeat(np.arange(1, 6, dtype=float), np.asarray(counts, dtype=int))
        return cls((column,), vals.reshape(-1, 1))


@dataclass(frozen=True)
class BinaryDataset:
    feature_names: tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray
    target_name: str = "target"
    n_dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        X = _frozen(self.features, dtype=float)
        y = _frozen(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise EmptyDataset(f"dataset needs n >= 1 and d >= 1, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"{y.shape[0]} labels for {X.shape[0]} rows")
        if X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length does not match feature columns")
        if np.isnan(X).any():
            raise ValueError("features contain missing values")
        if not np.all((y == DISLIKE) | (y == FAVOR)):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        """``(dislike, favor)`` counts."""
        n_fav = int(np.sum(self.labels == FAVOR))
        return self.n - n_fav, n_fav

    def subset(self, rows) -> "BinaryDataset":
        rows = np.asarray(rows)
        return BinaryDataset(
            self.feature_names, self.features[rows], self.labels[rows], self.target_name
        )

    def with_features(self, names: Sequence[str]) -> "BinaryDataset":
        missing = [f for f in names if f not in self.feature_names]
        if missing:
            raise KeyError(f"unknown features: {missing}")
        idx = [self.feature_names.index(f) for f in names]
        return BinaryDataset(
            tuple(names), self.features[:, idx], self.labels, self.target_name, self.n_dropped
        )

    def with_column(self, name: str, values) -> "BinaryDataset":
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        return BinaryDataset(
            self.feature_names + (name,),
            np.hstack([self.features, values]),
            self.labels,
            self.target_name,
            self.n_dropped,
        )


@dataclass(frozen=True)
class ImbalanceProfile:
    per_scale_counts: dict
    dislike_count: int
    favor_count: int
    ratio: float
    minority_class: int
    degenerate: bool = False


@dataclass(frozen=True)
class SplitPlan:
    k: int
    fold_assignment: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "fold_assignment", _frozen(self.fold_assignment, dtype=np.int64))

    def folds(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield ``(train_rows, test_rows)`` for every fold in order."""
        for f in range(self.k):
            test = np.flatnonzero(self.fold_assignment == f)
            train = np.flatnonzero(self.fold_assignment != f)
            yield train, test


# --------------------------------------------------------------------------
# ingestion

def _parse_cell(text: str, row: int, column: str) -> float:
    text = text.strip()
    if not text:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        return math.nan
    if math.isnan(value):
        return math.nan
    if not 1 <= value <= 5 or value != int(value):
        raise ValueOutOfRange(row, column, text)
    return value


def _check_header(header: Sequence[str]) -> tuple[str, ...]:
    names = tuple(h.strip() for h in header)
    if not names:
        raise MalformedHeader("header row is empty")
    empty = [i for i, h in enumerate(names) if not h]
    if empty:
        raise MalformedHeader(f"empty column name at position(s) {empty}")
    seen = set()
    dupes = sorted({h for h in names if h in seen or seen.add(h)})
    if dupes:
        raise MalformedHeader(f"duplicate column names: {dupes}")
    return names


def load_survey_csv(path, target_column: str | None = None) -> SurveyTable:
    """Parse a comma-separated survey file of 1-5 answers.

    Empty or non-numeric cells become missing; numeric cells outside 1-5
    raise :class:`ValueOutOfRange` naming the 1-based data row and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader(f"{path}: no header row") from None
        names = _check_header(header)
        if target_column is not None and target_column not in names:
            raise MissingTargetColumn(f"target column {target_column!r} not in header of {path}")
        rows = []
        for i, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(names):
                raise MalformedRow(f"{path}: row {i} has {len(record)} cells, expected {len(names)}")
            rows.append([_parse_cell(c, i, name) for c, name in zip(record, names)])
    values = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return SurveyTable(names, values)


def binarize(
    table: SurveyTable,
    target_column: str,
    threshold: int = 4,
    features: Sequence[str] | None = None,
) -> BinaryDataset:
    """Turn ordinal answers into a favor(+1)/dislike(-1) dataset.

    Rows missing the target or any retained predictor are dropped (listwise
    deletion); the number dropped is kept on the result.
    """
    if not 2 <= threshold <= 5:
        raise ValueError(f"threshold must be in [2, 5], got {threshold}")
    target = table.column(target_column)
    if features is None:
        features = [c for c in table.column_names if c != target_column]
    else:
        features = list(features)
        unknown = [f for f in features if f not in table.column_names]
        if unknown:
            raise MissingTargetColumn(f"feature columns not in table: {unknown}")
        if target_column in features:
            raise ValueError("target column cannot also be a feature")
    if not features:
        raise EmptyDataset("no predictor columns besides the target")
    idx = [table.column_names.index(f) for f in features]
    X = table.values[:, idx]
    keep = ~np.isnan(target) & ~np.isnan(X).any(axis=1)
    if not keep.any():
        raise EmptyDataset("every row has a missing target or predictor value")
    labels = np.where(target[keep] >= threshold, FAVOR, DISLIKE)
    return BinaryDataset(
        tuple(features), X[keep], labels, target_column, int(table.n_rows - keep.sum())
    )


def imbalance_profile(table: SurveyTable, target_column: str, threshold: int = 4) -> ImbalanceProfile:
    target = table.column(target_column)
    target = target[~np.isnan(target)]
    if target.size == 0:
        raise EmptyDataset(f"column {target_column!r} has no non-missing values")
    counts = {s: int(np.sum(target == s)) for s in SCALE}
    dislike = sum(c for s, c in counts.items() if s < threshold)
    favor = sum(c for s, c in counts.items() if s >= threshold)
    degenerate = dislike == 0 or favor == 0
    if degenerate:
        warnings.warn(
            f"{target_column!r}: one class is empty, ratio is infinite",
            DegenerateDistribution,
            stacklevel=2,
        )
        ratio = math.inf
    else:
        ratio = max(dislike, favor) / min(dislike, favor)
    minority = FAVOR if favor < dislike else DISLIKE
    return ImbalanceProfile(counts, dislike, favor, ratio, minority, degenerate)


def stratified_assignment(labels, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per row; each class is shuffled then dealt round-robin."""
    labels = np.asarray(labels)
    order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in (DISLIKE, FAVOR)])
    folds = np.empty(labels.size, dtype=np.int64)
    # dealing the concatenation keeps both per-class and total fold sizes within one
    folds[order] = np.arange(order.size) % k
    return folds


def stratified_kfold(dataset: BinaryDataset, k: int = 5, seed: int = 42) -> SplitPlan:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    counts = dataset.class_counts()
    if min(counts) < k:
        raise TooFewSamples(f"class counts (dislike, favor) = {counts}; each needs >= {k} rows")
    rng = np.random.default_rng([seed, k])
    return SplitPlan(k, stratified_assignment(dataset.labels, k, rng), seed)


def stratified_holdout(labels, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Split rows into ``(train, holdout)`` keeping ``fraction`` of each class aside."""
    labels = np.asarray(labels)
    rng = np.random.default_rng([seed, 1])
    held = []
    for c in (DISLIKE, FAVOR):
        rows = rng.permutation(np.flatnonzero(labels == c))
        take = int(round(fraction * rows.size))
        if rows.size >= 2:
            take = min(max(take, 1), rows.size - 1)
        held.append(rows[:take])
    holdout = np.sort(np.concatenate(held))
    train = np.setdiff1d(np.arange(labels.size), holdout)
    return train, holdout


def synth_survey(
    n: int,
    favor_fraction: float,
    d: int,
    informative: Sequence[int] = (),
    noise_level: float = 1.0,
    seed: int = 0,
    shift: float = 1.0,
) -> BinaryDataset:
    """Synthetic 1-5 survey with a planted signal.

    Exactly ``round(n * favor_fraction)`` rows are favor.  Informative
    columns are ``3 + shift * label`` plus Gaussian noise of scale
    ``noise_level``, rounded and clipped to 1-5; the rest are uniform on 1-5.
    """
    if not 0 < favor_fraction < 1:
        raise InvalidFraction(f"favor_fraction must be in (0, 1), got {favor_fraction}")
    if n < 1 or d < 1:
        raise EmptyDataset("n and d must be positive")
    informative = sorted(set(int(j) for j in informative))
    if any(not 0 <= j < d for j in informative):
        raise ValueError(f"informative indices must lie in [0, {d})")
    rng = np.random.default_rng(seed)
    n_fav = int(round(n * favor_fraction))
    labels = np.full(n, DISLIKE, dtype=np.int64)
    labels[:n_fav] = FAVOR
    labels = rng.permutation(labels)
    X = np.empty((n, d))
    for j in range(d):
        if j in informative:
            col = 3.0 + shift * labels + noise_level * rng.standard_normal(n)
            X[:, j] = np.clip(np.rint(col), 1, 5)
        else:
            X[:, j] = rng.integers(1, 6, size=n)
    names = tuple(f"f{j}" for j in range(d))
    return BinaryDataset(names, X, labels, "target")


# --------------------------------------------------------------------------
# columnar dataset file

def dumps_survey_csv(table: SurveyTable) -> str:
    """Inverse of :func:`load_survey_csv`; missing cells are written empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.column_names)
    for row in table.rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def write_survey_csv(table: SurveyTable, path) -> Path:
    return atomic_write_text(path, dumps_survey_csv(table))


def dumps_dataset(data: BinaryDataset) -> str:
    buf = io.StringIO()
    buf.write(f"{DATASET_MAGIC} v{DATASET_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(data.feature_names) + [data.target_name])
    w.writerow(["real"] * data.d + ["label"])
    for row, label in zip(data.features, data.labels):
        w.writerow([fmt_float(v) for v in row] + [int(label)])
    return buf.getvalue()


def write_dataset(data: BinaryDataset, path) -> Path:
    return atomic_write_text(path, dumps_dataset(data))


def is_dataset_file(path) -> bool:
    with Path(path).open(encoding="utf-8-sig") as fh:
        return fh.readline().startswith(DATASET_MAGIC)


def read_dataset(path) -> BinaryDataset:
    """Read a file written by :func:`write_dataset`."""
    with Path(path).open(newline="", encoding="utf-8-sig") as fh:
        first = fh.readline().strip()
        if not first.startswith(DATASET_MAGIC):
            raise VersionMismatch(f"{path}: not a costboost dataset file")
        version = first[len(DATASET_MAGIC):].strip()
        if version != f"v{DATASET_VERSION}":
            raise VersionMismatch(f"{path}: unsupported dataset version {version!r}")
        reader = csv.reader(fh)
        names = _check_header(next(reader))
        types = next(reader)
        if len(types) != len(names) or types[-1] != "label" or set(types[:-1]) - {"real"}:
            raise MalformedHeader(f"{path}: bad type row {types}")
        rows = [r for r in reader if r]
    arr = np.array([[float(c) for c in r] for r in rows], dtype=float).reshape(len(rows), len(names))
    return BinaryDataset(names[:-1], arr[:, :-1], arr[:, -1].astype(np.int64), names[-1])


def load_dataset(
    path,
    target_column: str,
    threshold: int = 4,
    features: Sequence[str] | None = None,
) -> BinaryDataset:
    """Load either a columnar dataset file or a raw survey CSV (binarized)."""
    if is_dataset_file(path):
        data = read_dataset(path)
        if target_column != data.target_name:
            raise MissingTargetColumn(
                f"{path} holds target {data.target_name!r}, not {target_column!r}"
            )
        if features is not None:
            data = data.with_features(features)
        return data
    table = load_survey_csv(path, target_column)
    return binarize(table, target_column, threshold, features)
