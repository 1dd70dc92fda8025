"""Sliding-window KNN with an Adwin detector on its error stream.

The window holds the most recent max_window rows in a ring buffer; when
Adwin signals drift the window is additionally trimmed to Adwin's own
(shrunk) width so stale rows from before the change stop voting.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from .drift import Adwin


class KnnAdwin:
    def __init__(self, n_features: int, k: int = 5, max_window: int = 1000,
                 delta: float = 0.002, check_interval: int = 1) -> None:
        self.n_features = int(n_features)
        self.k = int(k)
        self.max_window = int(max_window)
        self.detector = Adwin(delta=delta, check_interval=check_interval)
        self._X = np.zeros((self.max_window, self.n_features))
        self._y = np.zeros(self.max_window, dtype=np.int64)
        self._pos = 0
        self._count = 0
        self.n_seen = 0
        self.drift_events: list[int] = []

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n_features:
            raise ShapeMismatch(
                f"expected {self.n_features} features, got {x.shape[0]}")
        return x

    def _window(self) -> tuple[np.ndarray, np.ndarray]:
        idx = (self._pos - self._count + np.arange(self._count)) % self.max_window
        return self._X[idx], self._y[idx]

    def predict_one(self, x) -> int:
        x = self._check(x)
        if self._count == 0:
            return 0
        Xw, yw = self._window()
        d = np.sum((Xw - x[None, :]) ** 2, axis=1)
        k = min(self.k, d.size)
        near = np.argsort(d, kind="stable")[:k]
        return int(yw[near].mean() >= 0.5)

    def learn_one(self, x, y: int, pred: int | None = None) -> None:
        x = self._check(x)
        self.n_seen += 1
        if pred is None:
            pred = self.predict_one(x)
        sig = self.detector.update(int(pred != int(y)))
        self._X[self._pos] = x
        self._y[self._pos] = int(y)
        self._pos = (self._pos + 1) % self.max_window
        self._count = min(self._count + 1, self.max_window)
        if sig.is_drift and self.detector.cut_worse:
            self.drift_events.append(self.n_seen)
            self._count = min(self._count, max(self.detector.width, 1))
