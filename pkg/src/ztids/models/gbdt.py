"""Gradient-boosted decision trees with logistic loss.

Leaf-wise growth (best split gain first) under a num_leaves budget, exact
greedy splits, second-order leaf values. Boosting stops early once training
log-loss falls under a convergence floor; n_estimators stays the upper bound.
"""
from __future__ import annotations

import numpy as np

from .base import TrainedModel
from .mlp import _sigmoid
from .tree import Tree, grow_regression_tree

_LAM = 1e-3
_LOSS_FLOOR = 1e-7
_SCORE_CLIP = 30.0


class GbdtModel(TrainedModel):
    kind = "GBDT"

    def __init__(self, n_estimators: int = 100, max_depth: int = 12,
                 learning_rate: float = 0.1, num_leaves: int = 128,
                 min_child_samples: int = 20, seed: int = 0) -> None:
        super().__init__()
        self.n_estimators = int(n_estimators)
        self.max_depth = int(max_depth)
        self.learning_rate = float(learning_rate)
        self.num_leaves = int(num_leaves)
        self.min_child_samples = int(min_child_samples)
        self.seed = int(seed)
        self.params = {"n_estimators": self.n_estimators, "max_depth": self.max_depth,
                       "learning_rate": self.learning_rate,
                       "num_leaves": self.num_leaves,
                       "min_child_samples": self.min_child_samples}
        self.base_score = 0.0
        self.trees: list[Tree] = []

    def fit(self, X, y) -> "GbdtModel":
        X, y = self._check_training(X, y)
        yf = y.astype(np.float64)
        p1 = float(np.clip(yf.mean(), 1e-6, 1 - 1e-6))
        self.base_score = float(np.log(p1 / (1 - p1)))
        F = np.full(X.shape[0], self.base_score)
        self.trees = []
        for _ in range(self.n_estimators):
            p = _sigmoid(F)
            loss = float(np.mean(-yf * np.log(np.clip(p, 1e-15, 1))
                                 - (1 - yf) * np.log(np.clip(1 - p, 1e-15, 1))))
            if loss < _LOSS_FLOOR:
                break
            g = p - yf
            h = p * (1.0 - p)
            tree = grow_regression_tree(X, g, h, max_leaves=self.num_leaves,
                                        max_depth=self.max_depth,
                                        min_child=self.min_child_samples, lam=_LAM)
            if tree.n_leaves < 2:
                break
            self.trees.append(tree)
            F += self.learning_rate * tree.predict_value(X)
            np.clip(F, -_SCORE_CLIP, _SCORE_CLIP, out=F)
        self.n_features_in = X.shape[1]
        return self

    def decision_scores(self, X, n_trees: int | None = None) -> np.ndarray:
        """Additive raw score after the first n_trees stages."""
        X = self._check_X(X)
        F = np.full(X.shape[0], self.base_score)
        use = self.trees if n_trees is None else self.trees[:n_trees]
        for tree in use:
            F += self.learning_rate * tree.predict_value(X)
        return F

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_scores(X))
