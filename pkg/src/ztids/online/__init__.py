"""Streaming learners, drift detectors and prequential evaluation."""
from __future__ import annotations

from .drift import Adwin, Ddm, DriftSignal
from .hoeffding import HoeffdingTree
from .neighbors import KnnAdwin
from .ensembles import AdaptiveRandomForest, StreamingRandomPatches
from .prequential import PrequentialCurve, prequential_evaluate
from .automl import (ONLINE_KINDS, OnlineResult, OnlineSettings,
                     build_online_learner, default_online_params,
                     online_search_space, run_automl_online)

__all__ = ["Adwin", "Ddm", "DriftSignal", "HoeffdingTree", "KnnAdwin",
           "AdaptiveRandomForest", "StreamingRandomPatches",
           "PrequentialCurve", "prequential_evaluate", "ONLINE_KINDS",
           "OnlineResult", "OnlineSettings", "build_online_learner",
           "default_online_params", "online_search_space", "run_automl_online"]
