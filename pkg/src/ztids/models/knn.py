"""k-nearest-neighbor classifier (Euclidean distance, majority vote)."""
from __future__ import annotations

import numpy as np

from .base import TrainedModel


class KnnModel(TrainedModel):
    kind = "KNN"

    def __init__(self, k: int = 5) -> None:
        super().__init__()
        self.k = int(k)
        self.params = {"k": self.k}
        self._X: np.ndarray | None = None
        self._y: np.ndarray | None = None

    def fit(self, X, y) -> "KnnModel":
        X, y = self._check_training(X, y)
        if self.k > X.shape[0]:
            raise ValueError(f"k={self.k} exceeds {X.shape[0]} training rows")
        self._X = X.copy()
        self._y = y.copy()
        self.n_features_in = X.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = self._check_X(X)
        out = np.empty(X.shape[0])
        chunk = max(1, int(2_000_000 // max(self._X.shape[0], 1)))
        tn = np.sum(self._X * self._X, axis=1)[None, :]
        for s in range(0, X.shape[0], chunk):
            Q = X[s:s + chunk]
            d = np.sum(Q * Q, axis=1)[:, None] + tn - 2.0 * (Q @ self._X.T)
            # stable sort: equal distances resolve by training-row index
            near = np.argsort(d, axis=1, kind="stable")[:, :self.k]
            out[s:s + chunk] = self._y[near].mean(axis=1)
        return out
