"""Versioned model serialization.

Canonical JSON (sorted keys, compact separators) so identical models yield
identical bytes. Wall-clock fit time is deliberately excluded: it is the one
nondeterministic field and must never leak into the payload.
"""
from __future__ import annotations

import json

import numpy as np

from ..errors import CorruptModel, VersionMismatch
from .base import TrainedModel
from .forest import RandomForestModel
from .gbdt import GbdtModel
from .knn import KnnModel
from .mlp import MlpModel
from .tree import Tree

FORMAT = "ztids-model"
VERSION = 1


def serialize(model: TrainedModel) -> bytes:
    doc: dict = {"format": FORMAT, "version": VERSION, "kind": model.kind,
                 "n_features_in": model.n_features_in, "params": model.params}
    if isinstance(model, KnnModel):
        doc["train_X"] = model._X.tolist()
        doc["train_y"] = model._y.tolist()
    elif isinstance(model, MlpModel):
        doc["weights"] = [w.tolist() for w in model.weights]
        doc["biases"] = [b.tolist() for b in model.biases]
        doc["train_meta"] = {"epochs": model.epochs, "batch_size": model.batch_size,
                             "momentum": model.momentum, "seed": model.seed}
    elif isinstance(model, RandomForestModel):
        doc["trees"] = [t.as_dict() for t in model.trees]
        doc["feature_importances"] = model.feature_importances_.tolist()
        doc["seed"] = model.seed
    elif isinstance(model, GbdtModel):
        doc["trees"] = [t.as_dict() for t in model.trees]
        doc["base_score"] = model.base_score
        doc["seed"] = model.seed
    else:
        raise CorruptModel(f"cannot serialize kind {model.kind!r}")
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def deserialize(data: bytes) -> TrainedModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptModel(str(e)) from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CorruptModel("not a model payload")
    if doc.get("version") != VERSION:
        raise VersionMismatch(f"payload version {doc.get('version')!r}, expected {VERSION}")
    try:
        kind = doc["kind"]
        params = doc["params"]
        n_features = int(doc["n_features_in"])
        if kind == "KNN":
            model = KnnModel(k=params["k"])
            model._X = np.array(doc["train_X"], dtype=np.float64)
            model._y = np.array(doc["train_y"], dtype=np.int64)
        elif kind == "MLP":
            meta = doc["train_meta"]
            model = MlpModel(learning_rate=params["learning_rate"],
                             hidden_units=params["hidden_units"],
                             epochs=meta["epochs"], batch_size=meta["batch_size"],
                             momentum=meta["momentum"], seed=meta["seed"])
            model.weights = [np.array(w, dtype=np.float64) for w in doc["weights"]]
            model.biases = [np.array(b, dtype=np.float64) for b in doc["biases"]]
        elif kind == "RF":
            model = RandomForestModel(seed=doc.get("seed", 0), **params)
            model.trees = [Tree.from_dict(t) for t in doc["trees"]]
            model.feature_importances_ = np.array(doc["feature_importances"])
        elif kind == "GBDT":
            model = GbdtModel(seed=doc.get("seed", 0), **params)
            model.trees = [Tree.from_dict(t) for t in doc["trees"]]
            model.base_score = float(doc["base_score"])
        else:
            raise CorruptModel(f"unknown kind {kind!r}")
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptModel(f"malformed payload: {e}") from None
    model.n_features_in = n_features
    return model
