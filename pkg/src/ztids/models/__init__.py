"""Offline learners: KNN, MLP, random forest and boosted trees."""
from __future__ import annotations

import time

import numpy as np

from ..errors import NotDifferentiable, NotTreeBased
from .base import (KINDS, CandidateConfig, TrainedModel, default_config,
                   search_space, validate_config)
from .forest import RandomForestModel
from .gbdt import GbdtModel
from .io import deserialize, serialize
from .knn import KnnModel
from .mlp import MlpModel
from .tree import Tree

__all__ = ["KINDS", "CandidateConfig", "TrainedModel", "default_config",
           "search_space", "validate_config", "fit_model", "input_gradient",
           "tree_ensemble", "serialize", "deserialize", "KnnModel", "MlpModel",
           "RandomForestModel", "GbdtModel", "Tree"]


def fit_model(config: CandidateConfig, X, y, seed: int = 0) -> TrainedModel:
    """Validate the config, train the learner, record wall-clock fit time."""
    params = validate_config(config)
    if config.kind == "KNN":
        model: TrainedModel = KnnModel(k=params["k"])
    elif config.kind == "MLP":
        model = MlpModel(learning_rate=params["learning_rate"],
                         hidden_units=params["hidden_units"], seed=seed)
    elif config.kind == "RF":
        model = RandomForestModel(seed=seed, **params)
    else:
        model = GbdtModel(seed=seed, **params)
    t0 = time.perf_counter()
    model.fit(X, y)
    model.fit_seconds = time.perf_counter() - t0
    return model


def input_gradient(model: TrainedModel, X, y) -> np.ndarray:
    """Loss gradient w.r.t. the inputs; only the MLP supports this."""
    if not isinstance(model, MlpModel):
        raise NotDifferentiable(f"{model.kind} has no input gradients")
    return model.input_gradient(X, y)


def tree_ensemble(model: TrainedModel) -> tuple[list[Tree], str]:
    """Trees plus how leaves map to classes: "vote" (leaf value is the class)
    or "score" (leaf value is an additive score, positive means class 1)."""
    if isinstance(model, RandomForestModel):
        return model.trees, "vote"
    if isinstance(model, GbdtModel):
        return model.trees, "score"
    raise NotTreeBased(f"{model.kind} is not a decision-tree ensemble")
