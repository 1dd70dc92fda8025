"""Tabular flow-record container and CSV loading.

Features are kept as one float64 matrix with NaN marking missing cells.
Categorical columns (any cell that fails to parse as a number) keep their
raw strings in ``raw_categorical`` until the preprocessing stage assigns
integer codes; their matrix cells are NaN placeholders until then.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from ._rand import child_rng
from .errors import EmptyFile, MissingLabelColumn, RaggedRow, TooFewSamplesPerClass

DEFAULT_BENIGN = ("BENIGN", "Benign")

_MISSING = {"", "nan", "na", "null", "none", "?"}
_INFINITE = {"inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    column_kinds: list[str]
    raw_categorical: dict[int, np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        n, m = self.features.shape
        if self.labels.shape[0] != n:
            raise ValueError(f"{n} rows but {self.labels.shape[0]} labels")
        if len(self.feature_names) != m or len(self.column_kinds) != m:
            raise ValueError("feature metadata width differs from matrix width")
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise ValueError(f"labels must be 0/1, got extras {sorted(bad)}")
        if self.raw_categorical:
            for j, col in self.raw_categorical.items():
                if len(col) != n:
                    raise ValueError(f"raw column {j} has {len(col)} cells for {n} rows")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def select_rows(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        raw = None
        if self.raw_categorical:
            raw = {j: col[idx] for j, col in self.raw_categorical.items()}
        return Dataset(self.features[idx], self.labels[idx],
                       list(self.feature_names), list(self.column_kinds), raw)

    def select_columns(self, cols: Sequence[int]) -> "Dataset":
        cols = list(cols)
        raw = None
        if self.raw_categorical:
            raw = {cols.index(j): col for j, col in self.raw_categorical.items()
                   if j in cols}
            raw = raw or None
        return Dataset(self.features[:, cols], self.labels,
                       [self.feature_names[j] for j in cols],
                       [self.column_kinds[j] for j in cols], raw)


@dataclass
class FoldPlan:
    k: int
    seed: int
    folds: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


def _parse_cell(cell: str) -> tuple[float, bool]:
    """Return (value, is_numeric). Missing and infinite tokens become NaN."""
    s = cell.strip()
    low = s.lower()
    if low in _MISSING or low in _INFINITE:
        return math.nan, True
    try:
        v = float(s)
    except ValueError:
        return math.nan, False
    if math.isinf(v):
        return math.nan, True
    return v, True


def load_csv(path, label_column: str = "Label",
             benign_labels: Sequence[str] = DEFAULT_BENIGN) -> Dataset:
    """Load a flow CSV: header required, label column mapped to 0/1.

    Column kinds are inferred: a column where every cell parses as a number
    (missing/infinite tokens included) is numeric, anything else categorical.
    Negative values in columns whose name contains "duration" are treated as
    sensor glitches and become missing.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(str(path)) from None
        header = [h.strip() for h in header]
        rows = []
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != len(header):
                raise RaggedRow(f"row {i + 2}: {len(row)} cells, header has {len(header)}")
            rows.append(row)
    if not rows:
        raise EmptyFile(f"{path}: header only")
    if label_column not in header:
        raise MissingLabelColumn(label_column)

    label_idx = header.index(label_column)
    feat_idx = [j for j in range(len(header)) if j != label_idx]
    names = [header[j] for j in feat_idx]
    benign = {str(b).strip() for b in benign_labels}
    labels = np.array([0 if r[label_idx].strip() in benign else 1 for r in rows],
                      dtype=np.int64)

    n, m = len(rows), len(feat_idx)
    mat = np.full((n, m), np.nan)
    kinds = []
    raw: dict[int, np.ndarray] = {}
    for out_j, j in enumerate(feat_idx):
        cells = [r[j] for r in rows]
        parsed = [_parse_cell(c) for c in cells]
        if all(ok for _, ok in parsed):
            kinds.append("numeric")
            mat[:, out_j] = [v for v, _ in parsed]
            if "duration" in names[out_j].lower():
                col = mat[:, out_j]
                col[col < 0] = np.nan
        else:
            kinds.append("categorical")
            raw[out_j] = np.array([c.strip() for c in cells], dtype=object)
    return Dataset(mat, labels, names, kinds, raw or None)


def stratified_kfold(ds: Dataset, k: int, seed: int = 0) -> FoldPlan:
    """Class-proportional folds; deterministic for a given seed."""
    if k < 2:
        raise ValueError("k must be >= 2")
    folds_test: list[list[int]] = [[] for _ in range(k)]
    for cls in (0, 1):
        idx = np.flatnonzero(ds.labels == cls)
        if idx.size < k:
            raise TooFewSamplesPerClass(f"class {cls} has {idx.size} rows, need >= {k}")
        rng = child_rng(seed, "kfold", cls)
        idx = idx[rng.permutation(idx.size)]
        for pos, row in enumerate(idx):
            folds_test[pos % k].append(int(row))
    plan = FoldPlan(k=k, seed=seed)
    all_rows = np.arange(ds.n_rows)
    for f in range(k):
        test = np.sort(np.array(folds_test[f], dtype=np.int64))
        mask = np.ones(ds.n_rows, dtype=bool)
        mask[test] = False
        plan.folds.append((all_rows[mask], test))
    return plan


def stream(ds: Dataset) -> Iterator[tuple[np.ndarray, int]]:
    """Yield (feature_row, label) in stored row order."""
    for i in range(ds.n_rows):
        yield ds.features[i], int(ds.labels[i])
