"""Prequential (test-then-train) evaluation of a streaming learner."""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..metrics import Scores, score


@dataclass
class PrequentialCurve:
    running_accuracy: np.ndarray
    windowed_accuracy: np.ndarray
    window: int
    drift_indices: list[int]
    scores: Scores
    seconds: float
    n_samples: int

    def as_dict(self, curve_stride: int = 1) -> dict:
        s = max(1, int(curve_stride))
        return {
            "window": self.window,
            "n_samples": self.n_samples,
            "curve_stride": s,
            "running_accuracy": [round(float(v), 6) for v in self.running_accuracy[::s]],
            "windowed_accuracy": [round(float(v), 6) for v in self.windowed_accuracy[::s]],
            "drift_indices": list(self.drift_indices),
        }


def prequential_evaluate(learner, data_stream, window: int = 500) -> PrequentialCurve:
    """Score each sample before learning from it.

    data_stream yields (feature_row, label). The learner needs predict_one
    and learn_one; drift positions are read from its drift_events attribute
    when present.
    """
    t0 = time.perf_counter()
    preds: list[int] = []
    truth: list[int] = []
    running = []
    windowed = []
    recent: deque = deque(maxlen=window)
    correct = 0
    for i, (x, y) in enumerate(data_stream):
        pred = learner.predict_one(x)
        learner.learn_one(x, y, pred=pred)
        preds.append(pred)
        truth.append(int(y))
        hit = int(pred == y)
        correct += hit
        recent.append(hit)
        running.append(correct / (i + 1))
        windowed.append(sum(recent) / len(recent))
    if not preds:
        raise ValueError("empty stream")
    seconds = time.perf_counter() - t0
    return PrequentialCurve(
        running_accuracy=np.array(running),
        windowed_accuracy=np.array(windowed),
        window=window,
        drift_indices=list(getattr(learner, "drift_events", [])),
        scores=score(truth, preds),
        seconds=seconds,
        n_samples=len(preds),
    )
