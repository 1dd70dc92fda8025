"""Shared model contract: fit dispatch, defaults and tuning spaces.

All learners are binary classifiers over a fixed-width float matrix.
predict_proba returns P(class 1); predict returns 1 iff that probability
is >= 0.5.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

from ..errors import BadHyperparameter, ShapeMismatch, SingleClassTraining
from ..search import Dim, HyperparameterSpace

KINDS = ("KNN", "MLP", "RF", "GBDT")


@dataclass
class CandidateConfig:
    kind: str
    params: dict = field(default_factory=dict)


class TrainedModel(abc.ABC):
    kind: str = ""

    def __init__(self) -> None:
        self.n_features_in: int = 0
        self.params: dict = {}
        self.fit_seconds: float = 0.0

    def _check_X(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features_in:
            raise ShapeMismatch(
                f"model expects {self.n_features_in} features, got {X.shape[1]}")
        return X

    @abc.abstractmethod
    def predict_proba(self, X) -> np.ndarray:
        """P(class 1) per row."""

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    @staticmethod
    def _check_training(X, y) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ShapeMismatch("X rows and y length differ")
        if np.unique(y).size < 2:
            raise SingleClassTraining("training labels contain a single class")
        return X, y


def default_config(kind: str) -> CandidateConfig:
    if kind == "KNN":
        return CandidateConfig("KNN", {"k": 5})
    if kind == "MLP":
        return CandidateConfig("MLP", {"learning_rate": 0.05, "hidden_units": 64})
    if kind == "RF":
        return CandidateConfig("RF", {"n_estimators": 100, "max_depth": 15,
                                      "min_samples_split": 2, "min_samples_leaf": 1,
                                      "criterion": "gini"})
    if kind == "GBDT":
        return CandidateConfig("GBDT", {"n_estimators": 100, "max_depth": 12,
                                        "learning_rate": 0.1, "num_leaves": 128,
                                        "min_child_samples": 20})
    raise BadHyperparameter(f"unknown model kind {kind!r}")


def search_space(kind: str) -> HyperparameterSpace:
    if kind == "KNN":
        return HyperparameterSpace([Dim("k", "integer", 1, 25)])
    if kind == "MLP":
        return HyperparameterSpace([
            Dim("learning_rate", "continuous", 1e-3, 0.3),
            Dim("hidden_units", "integer", 16, 128),
        ])
    if kind == "RF":
        return HyperparameterSpace([
            Dim("n_estimators", "integer", 50, 500),
            Dim("max_depth", "integer", 5, 50),
            Dim("min_samples_split", "integer", 2, 11),
            Dim("min_samples_leaf", "integer", 1, 11),
            Dim("criterion", "categorical", options=("gini", "entropy")),
        ])
    if kind == "GBDT":
        return HyperparameterSpace([
            Dim("n_estimators", "integer", 50, 500),
            Dim("max_depth", "integer", 5, 50),
            Dim("learning_rate", "continuous", 0.0, 1.0, open_lo=True, open_hi=True),
            Dim("num_leaves", "integer", 100, 2000),
            Dim("min_child_samples", "integer", 10, 50),
        ])
    raise BadHyperparameter(f"unknown model kind {kind!r}")


def validate_config(config: CandidateConfig) -> dict:
    """Merge defaults with overrides and type-check every value."""
    base = default_config(config.kind).params
    space = {d.name: d for d in search_space(config.kind).dims}
    params = dict(base)
    for name, v in config.params.items():
        if name not in space:
            raise BadHyperparameter(f"{config.kind}: unknown hyperparameter {name!r}")
        d = space[name]
        if d.kind == "categorical":
            if v not in d.options:
                raise BadHyperparameter(f"{config.kind}.{name}: {v!r} not in {d.options}")
        elif d.kind == "integer":
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise BadHyperparameter(f"{config.kind}.{name}: expected int, got {v!r}")
            if not (d.lo <= v <= d.hi):
                raise BadHyperparameter(
                    f"{config.kind}.{name}: {v} outside [{int(d.lo)}, {int(d.hi)}]")
        else:
            v = float(v)
            lo_ok = v > d.lo if d.open_lo else v >= d.lo
            hi_ok = v < d.hi if d.open_hi else v <= d.hi
            if not (lo_ok and hi_ok):
                raise BadHyperparameter(f"{config.kind}.{name}: {v} outside bounds")
        params[name] = v
    return params
