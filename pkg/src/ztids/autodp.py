"""Automated data preparation.

Fit order on training rows: categorical encoding, median imputation,
normalization (scheme auto-selected from the outlier rate), then ADASYN
oversampling of the minority class. Test rows get the same encode, impute
and normalize steps but are never balanced.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._rand import child_rng
from .dataset import Dataset
from .errors import DegenerateColumn, MinorityTooSmall

logger = logging.getLogger(__name__)

ZSCORE = "zscore"
MINMAX = "minmax"
UNSEEN = "<unseen>"


@dataclass
class BalanceStats:
    n_majority: int
    n_minority: int
    n_synthesized: int
    k_neighbors: int
    beta: float

    def as_dict(self) -> dict:
        return {"n_majority": self.n_majority, "n_minority": self.n_minority,
                "n_synthesized": self.n_synthesized,
                "k_neighbors": self.k_neighbors, "beta": self.beta}

    @staticmethod
    def from_dict(doc: dict) -> "BalanceStats":
        return BalanceStats(n_majority=int(doc["n_majority"]),
                            n_minority=int(doc["n_minority"]),
                            n_synthesized=int(doc["n_synthesized"]),
                            k_neighbors=int(doc["k_neighbors"]),
                            beta=float(doc["beta"]))


@dataclass
class PreprocessReport:
    encoders: dict[int, dict[str, int]]
    medians: list[float]
    norm_choice: str
    norm_params: list[tuple[float, float]]
    outlier_fraction: float
    outlier_threshold: float
    fitted_rows: int
    balance: BalanceStats | None = None

    def as_dict(self) -> dict:
        return {
            "encoders": {str(j): enc for j, enc in self.encoders.items()},
            "medians": list(self.medians),
            "norm_choice": self.norm_choice,
            "norm_params": [list(p) for p in self.norm_params],
            "outlier_fraction": self.outlier_fraction,
            "outlier_threshold": self.outlier_threshold,
            "fitted_rows": self.fitted_rows,
            "balance": self.balance.as_dict() if self.balance else None,
        }

    @staticmethod
    def from_dict(doc: dict) -> "PreprocessReport":
        return PreprocessReport(
            encoders={int(j): dict(enc) for j, enc in doc["encoders"].items()},
            medians=[float(v) for v in doc["medians"]],
            norm_choice=str(doc["norm_choice"]),
            norm_params=[(float(a), float(b)) for a, b in doc["norm_params"]],
            outlier_fraction=float(doc["outlier_fraction"]),
            outlier_threshold=float(doc["outlier_threshold"]),
            fitted_rows=int(doc["fitted_rows"]),
            balance=BalanceStats.from_dict(doc["balance"]) if doc.get("balance") else None,
        )


def fit_encoding(ds: Dataset) -> dict[int, dict[str, int]]:
    """First-appearance integer codes per categorical column."""
    encoders: dict[int, dict[str, int]] = {}
    if not ds.raw_categorical:
        return encoders
    for j, col in sorted(ds.raw_categorical.items()):
        codes: dict[str, int] = {}
        for v in col:
            if v not in codes:
                codes[v] = len(codes)
        encoders[j] = codes
    return encoders


def apply_encoding(ds: Dataset, encoders: dict[int, dict[str, int]]) -> Dataset:
    """Replace categorical strings with codes; unseen values get code = vocab size."""
    if not encoders:
        return Dataset(ds.features.copy(), ds.labels.copy(),
                       list(ds.feature_names), list(ds.column_kinds), None)
    mat = ds.features.copy()
    raw = ds.raw_categorical or {}
    for j, codes in encoders.items():
        if j not in raw:
            raise KeyError(f"column {j} has an encoder but no raw strings")
        unseen = len(codes)
        mat[:, j] = [codes.get(v, unseen) for v in raw[j]]
    return Dataset(mat, ds.labels.copy(), list(ds.feature_names),
                   list(ds.column_kinds), None)


def fit_imputer(ds: Dataset) -> list[float]:
    """Per-column median over observed cells."""
    medians = []
    for j in range(ds.n_features):
        col = ds.features[:, j]
        obs = col[~np.isnan(col)]
        if not obs.size:
            raise DegenerateColumn(
                f"column {j} ({ds.feature_names[j]}) has no observed values")
        medians.append(float(np.median(obs)))
    return medians


def apply_imputer(ds: Dataset, medians: Sequence[float]) -> Dataset:
    mat = ds.features.copy()
    for j, med in enumerate(medians):
        col = mat[:, j]
        col[np.isnan(col)] = med
    return Dataset(mat, ds.labels.copy(), list(ds.feature_names),
                   list(ds.column_kinds), ds.raw_categorical)


def outlier_fraction(X: np.ndarray) -> float:
    """Share of cells outside the per-column Tukey fences (1.5 * IQR)."""
    X = np.asarray(X, dtype=np.float64)
    q1 = np.percentile(X, 25, axis=0)
    q3 = np.percentile(X, 75, axis=0)
    iqr = q3 - q1
    lo = q1 - 1.5 * iqr
    hi = q3 + 1.5 * iqr
    out = (X < lo) | (X > hi)
    return float(np.count_nonzero(out)) / X.size


def select_normalization(ds: Dataset, threshold: float = 0.01) -> tuple[str, float]:
    """Pick z-score when the outlier share exceeds threshold, else min-max."""
    frac = outlier_fraction(ds.features)
    choice = ZSCORE if frac > threshold else MINMAX
    logger.debug("normalization choice %s (outlier fraction %.4f, threshold %.4f)",
                 choice, frac, threshold)
    return choice, frac


def fit_normalization(ds: Dataset, choice: str) -> list[tuple[float, float]]:
    """Per-column (mean, stddev) or (min, max); constant columns keep zero spread."""
    params = []
    for j in range(ds.n_features):
        col = ds.features[:, j]
        if choice == ZSCORE:
            params.append((float(np.mean(col)), float(np.std(col))))
        elif choice == MINMAX:
            params.append((float(np.min(col)), float(np.max(col))))
        else:
            raise ValueError(f"unknown normalization {choice!r}")
    return params


def normalize(ds: Dataset, choice: str, params: Sequence[tuple[float, float]]) -> Dataset:
    """Affine transform per column; test values may leave [0, 1] under min-max.

    Columns that were constant at fit time (zero spread) map to 0 everywhere.
    """
    mat = ds.features.copy()
    for j, (a, b) in enumerate(params):
        spread = b if choice == ZSCORE else b - a
        if spread == 0.0:
            mat[:, j] = 0.0
        else:
            mat[:, j] = (mat[:, j] - a) / spread
    return Dataset(mat, ds.labels.copy(), list(ds.feature_names),
                   list(ds.column_kinds), ds.raw_categorical)


def denormalize(choice: str, params: Sequence[tuple[float, float]],
                X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = X.copy()
    for j, (a, b) in enumerate(params):
        if choice == ZSCORE:
            out[:, j] = X[:, j] * b + a
        else:
            out[:, j] = X[:, j] * (b - a) + a
    return out


def balance_adasyn(ds: Dataset, k_neighbors: int = 5, beta: float = 1.0,
                   seed: int = 0) -> Dataset:
    """ADASYN oversampling of the minority class.

    Synthetic rows are appended after the originals, so the input is always a
    prefix of the output. Harder minority points (more majority neighbors
    among their k nearest) receive proportionally more synthetic samples.
    Returns the input unchanged when the classes are already balanced.
    """
    if ds.raw_categorical:
        raise ValueError("balance requires encoded (fully numeric) features")
    X, y = ds.features, ds.labels
    if np.isnan(X).any():
        raise ValueError("balance requires imputed features")
    n1 = int(np.sum(y == 1))
    n0 = int(np.sum(y == 0))
    if n1 == 0 or n0 == 0:
        raise MinorityTooSmall("both classes must be present")
    minority = 1 if n1 < n0 else 0
    n_min = min(n0, n1)
    n_maj = max(n0, n1)
    G = int(np.floor((n_maj - n_min) * beta))
    if G <= 0:
        return ds
    if n_min < k_neighbors + 1:
        raise MinorityTooSmall(
            f"minority class has {n_min} rows, need >= {k_neighbors + 1}")

    min_idx = np.flatnonzero(y == minority)
    Xm = X[min_idx]

    # squared distances minority -> all rows; self excluded by +inf
    d_all = _sq_dists(Xm, X)
    d_all[np.arange(len(min_idx)), min_idx] = np.inf
    near_all = np.argsort(d_all, axis=1, kind="stable")[:, :k_neighbors]
    r = np.array([np.sum(y[row] != minority) for row in near_all], dtype=np.float64)
    r /= k_neighbors

    s = r.sum()
    if s > 0:
        quota = r / s * G
    else:
        quota = np.full(len(min_idx), G / len(min_idx))
    g = np.floor(quota).astype(np.int64)
    short = G - int(g.sum())
    if short > 0:
        frac = quota - g
        order = np.argsort(-frac, kind="stable")
        g[order[:short]] += 1

    d_min = _sq_dists(Xm, Xm)
    np.fill_diagonal(d_min, np.inf)
    near_min = np.argsort(d_min, axis=1, kind="stable")[:, :k_neighbors]

    rng = child_rng(seed, "adasyn")
    synth = np.empty((G, X.shape[1]))
    pos = 0
    for i in range(len(min_idx)):
        for _ in range(int(g[i])):
            nb = near_min[i, rng.integers(0, k_neighbors)]
            lam = rng.random()
            synth[pos] = Xm[i] + lam * (Xm[nb] - Xm[i])
            pos += 1
    new_X = np.vstack([X, synth])
    new_y = np.concatenate([y, np.full(G, minority, dtype=np.int64)])
    return Dataset(new_X, new_y, list(ds.feature_names), list(ds.column_kinds), None)


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.sum(A * A, axis=1)[:, None]
    bb = np.sum(B * B, axis=1)[None, :]
    d = aa + bb - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def fit_preprocessor(ds: Dataset, outlier_threshold: float = 0.01,
                     balance: bool = True, adasyn_k: int = 5,
                     adasyn_beta: float = 1.0, seed: int = 0,
                     ) -> tuple[PreprocessReport, Dataset]:
    """Fit every step on ds and return (report, transformed training set)."""
    encoders = fit_encoding(ds)
    out = apply_encoding(ds, encoders)
    medians = fit_imputer(out)
    out = apply_imputer(out, medians)
    choice, frac = select_normalization(out, outlier_threshold)
    params = fit_normalization(out, choice)
    out = normalize(out, choice, params)
    stats = None
    if balance:
        before = out.n_rows
        n1 = int(np.sum(out.labels == 1))
        out = balance_adasyn(out, k_neighbors=adasyn_k, beta=adasyn_beta, seed=seed)
        stats = BalanceStats(n_majority=max(before - n1, n1),
                             n_minority=min(before - n1, n1),
                             n_synthesized=out.n_rows - before,
                             k_neighbors=adasyn_k, beta=adasyn_beta)
    report = PreprocessReport(encoders=encoders, medians=medians,
                              norm_choice=choice, norm_params=params,
                              outlier_fraction=frac,
                              outlier_threshold=outlier_threshold,
                              fitted_rows=ds.n_rows, balance=stats)
    return report, out


def apply_preprocessor(report: PreprocessReport, ds: Dataset) -> Dataset:
    """Encode, impute and normalize with fitted parameters. Never balances."""
    out = apply_encoding(ds, report.encoders)
    out = apply_imputer(out, report.medians)
    return normalize(out, report.norm_choice, report.norm_params)
