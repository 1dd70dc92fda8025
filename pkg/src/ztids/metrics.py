"""Binary classification scores and timing helpers.

Positive class is 1 (attack). Zero-denominator conventions: precision is 0
when nothing was predicted positive, recall is 0 when nothing is positive,
F1 is 0 when precision + recall is 0.
"""
from __future__ import annotations

import time
from typing import NamedTuple

import numpy as np

from .errors import EmptyInput, LengthMismatch


class Confusion(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class Scores(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: Confusion


def confusion(y_true, y_pred) -> Confusion:
    yt = np.asarray(y_true).astype(np.int64).ravel()
    yp = np.asarray(y_pred).astype(np.int64).ravel()
    if yt.size != yp.size:
        raise LengthMismatch(f"{yt.size} labels vs {yp.size} predictions")
    if yt.size == 0:
        raise EmptyInput("no samples to score")
    tp = int(np.sum((yt == 1) & (yp == 1)))
    fp = int(np.sum((yt == 0) & (yp == 1)))
    tn = int(np.sum((yt == 0) & (yp == 0)))
    fn = int(np.sum((yt == 1) & (yp == 0)))
    return Confusion(tp=tp, fp=fp, tn=tn, fn=fn)


def score(y_true, y_pred) -> Scores:
    """Accuracy, precision, recall, F1 and the confusion counts."""
    c = confusion(y_true, y_pred)
    acc = (c.tp + c.tn) / c.total
    prec = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else 0.0
    rec = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else 0.0
    f1 = 2 * prec * rec / (prec + rec) if (prec + rec) > 0 else 0.0
    return Scores(accuracy=acc, precision=prec, recall=rec, f1=f1, confusion=c)


def f1_loss(y_true, y_pred) -> float:
    """1 - F1, the objective minimized by the model search."""
    return 1.0 - score(y_true, y_pred).f1


def as_percentages(s: Scores) -> dict:
    """Report block: rates as percentages rounded to 3 decimals."""
    return {
        "accuracy_pct": round(100.0 * s.accuracy, 3),
        "precision_pct": round(100.0 * s.precision, 3),
        "recall_pct": round(100.0 * s.recall, 3),
        "f1_pct": round(100.0 * s.f1, 3),
        "confusion": {"tp": s.confusion.tp, "fp": s.confusion.fp,
                      "tn": s.confusion.tn, "fn": s.confusion.fn},
    }


class Stopwatch:
    """Context manager measuring wall-clock seconds into .seconds."""

    def __enter__(self) -> "Stopwatch":
        self._t0 = time.perf_counter()
        self.seconds = 0.0
        return self

    def __exit__(self, *exc) -> None:
        self.seconds = time.perf_counter() - self._t0


def timed(block):
    """Run a zero-argument callable, returning (result, wall seconds)."""
    t0 = time.perf_counter()
    result = block()
    return result, time.perf_counter() - t0
