"""Model selection for streaming learners.

Stage 1 replays the stream through every candidate at default settings;
stage 2 swarm-searches the hyperparameters of the two best-ranked candidates
(or of every candidate with tune_all), objective 1 - final prequential
accuracy. The ARF/SRP spaces are small discrete grids, so their searches
enumerate exhaustively whenever the budget covers the grid.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from ..autodp import PreprocessReport, apply_preprocessor, fit_preprocessor
from ..dataset import Dataset, stream
from ..search import Dim, HyperparameterSpace, SearchResult, pso_minimize, random_search
from .ensembles import AdaptiveRandomForest, StreamingRandomPatches
from .hoeffding import HoeffdingTree
from .neighbors import KnnAdwin
from .prequential import PrequentialCurve, prequential_evaluate

logger = logging.getLogger(__name__)

ONLINE_KINDS = ("HT", "KNN_ADWIN", "ARF", "SRP")


def default_online_params(kind: str) -> dict:
    if kind == "HT":
        return {"grace_period": 200, "tie_threshold": 0.05}
    if kind == "KNN_ADWIN":
        return {"k": 5, "max_window": 1000}
    if kind in ("ARF", "SRP"):
        return {"n_models": 5, "drift_detector": "ADWIN"}
    raise ValueError(f"unknown online kind {kind!r}")


def online_search_space(kind: str) -> HyperparameterSpace:
    if kind == "HT":
        return HyperparameterSpace([
            Dim("grace_period", "integer", 50, 500),
            Dim("tie_threshold", "continuous", 0.01, 0.2),
        ])
    if kind == "KNN_ADWIN":
        return HyperparameterSpace([
            Dim("k", "integer", 3, 15),
            Dim("max_window", "integer", 200, 2000),
        ])
    if kind in ("ARF", "SRP"):
        return HyperparameterSpace([
            Dim("n_models", "integer", 3, 10),
            Dim("drift_detector", "categorical", options=("ADWIN", "DDM")),
        ])
    raise ValueError(f"unknown online kind {kind!r}")


def build_online_learner(kind: str, params: dict, n_features: int, seed: int = 0):
    p = dict(default_online_params(kind))
    p.update(params or {})
    if kind == "HT":
        return HoeffdingTree(n_features, grace_period=int(p["grace_period"]),
                             tie_threshold=float(p["tie_threshold"]))
    if kind == "KNN_ADWIN":
        return KnnAdwin(n_features, k=int(p["k"]), max_window=int(p["max_window"]))
    if kind == "ARF":
        return AdaptiveRandomForest(n_features, n_models=int(p["n_models"]),
                                    drift_detector=str(p["drift_detector"]), seed=seed)
    if kind == "SRP":
        return StreamingRandomPatches(n_features, n_models=int(p["n_models"]),
                                      drift_detector=str(p["drift_detector"]), seed=seed)
    raise ValueError(f"unknown online kind {kind!r}")


@dataclass
class OnlineSettings:
    candidates: tuple = ONLINE_KINDS
    window: int = 500
    swarm: int = 10
    iters: int = 10
    searcher: str = "pso"
    random_trials: int = 100
    tune_all: bool = False
    preprocess: bool = True
    outlier_threshold: float = 0.01
    threads: int = 1
    seed: int = 0


@dataclass
class OnlineResult:
    winner_kind: str
    best_params: dict
    default_accuracy: float
    tuned_accuracy: float
    stage1: list[dict]
    tuned: dict = field(default_factory=dict)   # kind -> stage-2 summary
    curves: dict = field(default_factory=dict)  # label -> PrequentialCurve
    preprocess: PreprocessReport | None = None
    seconds: dict = field(default_factory=dict)
    settings: OnlineSettings | None = None


def run_automl_online(ds: Dataset, settings: OnlineSettings | None = None,
                      ) -> OnlineResult:
    st = settings or OnlineSettings()
    seconds: dict[str, float] = {}
    t0 = time.perf_counter()

    report = None
    if st.preprocess:
        report, _ = fit_preprocessor(ds, outlier_threshold=st.outlier_threshold,
                                     balance=False, seed=st.seed)
        table = apply_preprocessor(report, ds)
    else:
        table = ds
    seconds["preprocess"] = time.perf_counter() - t0

    def replay(kind: str, params: dict, fit_seed: int) -> PrequentialCurve:
        learner = build_online_learner(kind, params, table.n_features, seed=fit_seed)
        return prequential_evaluate(learner, stream(table), window=st.window)

    t1 = time.perf_counter()
    curves: dict[str, PrequentialCurve] = {}
    stage1 = []
    for kind in st.candidates:
        params = default_online_params(kind)
        curve = replay(kind, params, st.seed)
        curves[f"{kind}-default"] = curve
        stage1.append({"kind": kind, "params": params,
                       "accuracy": curve.scores.accuracy,
                       "objective": 1.0 - curve.scores.accuracy})
        logger.info("stage 1: %s default accuracy %.5f", kind, curve.scores.accuracy)
    stage1.sort(key=lambda r: (r["objective"], st.candidates.index(r["kind"])))
    seconds["stage1"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    to_tune = [r["kind"] for r in (stage1 if st.tune_all else stage1[:2])]
    tuned: dict[str, dict] = {}
    for kind in to_tune:
        memo: dict[str, PrequentialCurve] = {}

        def objective(params: dict, _kind=kind, _memo=memo):
            key = repr(sorted(params.items()))
            if key not in _memo:
                _memo[key] = replay(_kind, params, st.seed)
            return 1.0 - _memo[key].scores.accuracy

        space = online_search_space(kind)
        warm = default_online_params(kind)
        if st.searcher == "random":
            result: SearchResult = random_search(objective, space,
                                                 n_trials=st.random_trials,
                                                 seed=st.seed, threads=st.threads)
        else:
            result = pso_minimize(objective, space, swarm=st.swarm, iters=st.iters,
                                  seed=st.seed, warm_start=warm, threads=st.threads)
        default_acc = next(r["accuracy"] for r in stage1 if r["kind"] == kind)
        best_params, best_acc = result.best_params, 1.0 - result.best_value
        if default_acc > best_acc:
            best_params, best_acc = dict(warm), default_acc
        key = repr(sorted(best_params.items()))
        curves[f"{kind}-tuned"] = memo.get(key) or replay(kind, best_params, st.seed)
        tuned[kind] = {"params": best_params, "accuracy": best_acc,
                       "default_accuracy": default_acc,
                       "trace": result.trace}
        logger.info("stage 2: %s tuned accuracy %.5f (default %.5f)",
                    kind, best_acc, default_acc)
    seconds["stage2"] = time.perf_counter() - t2

    winner = max(tuned, key=lambda k: (tuned[k]["accuracy"],
                                       -list(st.candidates).index(k)))
    seconds["total"] = time.perf_counter() - t0
    return OnlineResult(winner_kind=winner, best_params=tuned[winner]["params"],
                        default_accuracy=tuned[winner]["default_accuracy"],
                        tuned_accuracy=tuned[winner]["accuracy"], stage1=stage1,
                        tuned=tuned, curves=curves, preprocess=report,
                        seconds=seconds, settings=st)
