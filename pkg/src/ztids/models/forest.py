"""Random forest: bootstrapped exact-split trees, sqrt feature subsets."""
from __future__ import annotations

import numpy as np

from .._rand import child_rng
from .base import TrainedModel
from .tree import Tree, grow_classification_tree


class RandomForestModel(TrainedModel):
    kind = "RF"

    def __init__(self, n_estimators: int = 100, max_depth: int = 15,
                 min_samples_split: int = 2, min_samples_leaf: int = 1,
                 criterion: str = "gini", seed: int = 0) -> None:
        super().__init__()
        self.n_estimators = int(n_estimators)
        self.max_depth = int(max_depth)
        self.min_samples_split = int(min_samples_split)
        self.min_samples_leaf = int(min_samples_leaf)
        self.criterion = str(criterion)
        self.seed = int(seed)
        self.params = {"n_estimators": self.n_estimators, "max_depth": self.max_depth,
                       "min_samples_split": self.min_samples_split,
                       "min_samples_leaf": self.min_samples_leaf,
                       "criterion": self.criterion}
        self.trees: list[Tree] = []
        self.feature_importances_: np.ndarray | None = None

    def fit(self, X, y) -> "RandomForestModel":
        X, y = self._check_training(X, y)
        n, m = X.shape
        mtry = max(1, int(np.ceil(np.sqrt(m))))
        self.trees = []
        total_imp = np.zeros(m)
        for t in range(self.n_estimators):
            rng = child_rng(self.seed, "rf-tree", t)
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
            tree, imp = grow_classification_tree(
                X, y, counts.astype(np.float64), criterion=self.criterion,
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                min_samples_leaf=self.min_samples_leaf,
                max_features=mtry, rng=rng)
            self.trees.append(tree)
            s = imp.sum()
            if s > 0:
                total_imp += imp / s
        self.feature_importances_ = (total_imp / total_imp.sum()
                                     if total_imp.sum() > 0 else np.full(m, 1.0 / m))
        self.n_features_in = m
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Fraction of trees voting class 1."""
        X = self._check_X(X)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict_value(X)
        return votes / len(self.trees)
