"""Combined algorithm selection and hyperparameter search (offline).

Objective: mean over stratified folds of 1 - F1, preprocessing refit inside
every fold so test rows never leak into encoders, medians, normalization or
oversampling. Stage 1 ranks all model kinds at default settings; stage 2
searches the spaces of the two best-ranked kinds, each warm-started from its
defaults, and keeps the lower tuned objective, so the winning objective can
never be worse than either default.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ._rand import child_rng
from .autodp import PreprocessReport, apply_preprocessor, fit_preprocessor
from .autofe import FeatureSelection, select_features
from .dataset import Dataset, FoldPlan, stratified_kfold
from .metrics import Scores, score
from .models import CandidateConfig, KINDS, TrainedModel, default_config, fit_model, search_space
from .search import SearchResult, SearchTrace, pso_minimize, random_search

logger = logging.getLogger(__name__)


@dataclass
class OfflineSettings:
    folds: int = 5
    kinds: tuple = KINDS
    swarm: int = 20
    iters: int = 30
    searcher: str = "pso"  # or "random"
    random_trials: int = 600
    outlier_threshold: float = 0.01
    balance: bool = True
    adasyn_k: int = 5
    adasyn_beta: float = 1.0
    autofe: bool = True
    pearson_threshold: float = 0.9
    fe_swarm: int = 10
    fe_iters: int = 10
    rfe_step: int = 1
    rfe_max_rows: int | None = None
    fe_eval_row_cap: int | None = None
    threads: int = 1
    seed: int = 0


@dataclass
class PreparedFold:
    train: Dataset
    test: Dataset
    report: PreprocessReport


def prepare_folds(ds: Dataset, fold_plan: FoldPlan, outlier_threshold: float = 0.01,
                  balance: bool = True, adasyn_k: int = 5, adasyn_beta: float = 1.0,
                  seed: int = 0) -> list[PreparedFold]:
    """Fit preprocessing on each fold's training rows only."""
    out = []
    for f, (train_idx, test_idx) in enumerate(fold_plan.folds):
        train_raw = ds.select_rows(train_idx)
        test_raw = ds.select_rows(test_idx)
        report, train = fit_preprocessor(train_raw, outlier_threshold=outlier_threshold,
                                         balance=balance, adasyn_k=adasyn_k,
                                         adasyn_beta=adasyn_beta,
                                         seed=int(child_rng(seed, "fold", f).integers(2**31)))
        test = apply_preprocessor(report, test_raw)
        out.append(PreparedFold(train=train, test=test, report=report))
    return out


def _params_key(kind: str, params: dict) -> str:
    return kind + "|" + json.dumps(params, sort_keys=True)


def _eval_config(kind: str, params: dict, prepared: list[PreparedFold],
                 seed: int) -> tuple[float, list[float], list[Scores]]:
    losses, fold_scores = [], []
    for pf in prepared:
        model = fit_model(CandidateConfig(kind, params), pf.train.features,
                          pf.train.labels, seed=seed)
        s = score(pf.test.labels, model.predict(pf.test.features))
        losses.append(1.0 - s.f1)
        fold_scores.append(s)
    return float(np.mean(losses)), losses, fold_scores


def cv_objective(kind: str, params: dict, ds: Dataset, fold_plan: FoldPlan,
                 prepared: list[PreparedFold] | None = None, seed: int = 0,
                 **prep_kw) -> float:
    """Mean over folds of 1 - F1 for one candidate configuration."""
    if prepared is None:
        prepared = prepare_folds(ds, fold_plan, seed=seed, **prep_kw)
    return _eval_config(kind, params, prepared, seed)[0]


def cash_select(prepared: list[PreparedFold], kinds=KINDS, seed: int = 0,
                ) -> list[dict]:
    """Rank model kinds at default settings, ascending objective.

    Ties keep the kinds' listed order.
    """
    if len(kinds) < 2:
        raise ValueError("model selection needs at least 2 candidate kinds")
    rows = []
    for kind in kinds:
        params = default_config(kind).params
        loss, fold_losses, _ = _eval_config(kind, params, prepared, seed)
        rows.append({"kind": kind, "params": params, "objective": loss,
                     "fold_objectives": fold_losses})
        logger.info("stage 1: %s default objective %.5f", kind, loss)
    rows.sort(key=lambda r: (r["objective"], kinds.index(r["kind"])))
    return rows


@dataclass
class OfflineResult:
    winner_kind: str
    best_params: dict
    default_objective: float
    tuned_objective: float
    stage1: list[dict]
    stage2: list[dict]
    trace: SearchTrace
    fold_scores: list[Scores]
    model: TrainedModel
    preprocess: PreprocessReport
    features: FeatureSelection
    fold_plan: FoldPlan
    seconds: dict = field(default_factory=dict)
    settings: OfflineSettings | None = None


def run_automl_offline(ds: Dataset, settings: OfflineSettings | None = None,
                       ) -> OfflineResult:
    """Full offline pipeline: preprocessing, feature selection, CASH."""
    st = settings or OfflineSettings()
    seconds: dict[str, float] = {}
    t0 = time.perf_counter()

    fold_plan = stratified_kfold(ds, st.folds, seed=st.seed)

    # feature selection runs on the globally preprocessed (never balanced)
    # table so fold indices stay valid for its internal CV
    if st.autofe and ds.n_features > 1:
        report0, _ = fit_preprocessor(ds, outlier_threshold=st.outlier_threshold,
                                      balance=False, seed=st.seed)
        table = apply_preprocessor(report0, ds)
        selection = select_features(table, fold_plan,
                                    pearson_threshold=st.pearson_threshold,
                                    swarm=st.fe_swarm, iters=st.fe_iters,
                                    step=st.rfe_step, seed=st.seed,
                                    max_rows=st.rfe_max_rows,
                                    eval_row_cap=st.fe_eval_row_cap)
    else:
        selection = FeatureSelection(kept=list(range(ds.n_features)),
                                     n_selected=ds.n_features)
    ds_sel = ds.select_columns(selection.kept)
    seconds["autofe"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    prepared = prepare_folds(ds_sel, fold_plan, outlier_threshold=st.outlier_threshold,
                             balance=st.balance, adasyn_k=st.adasyn_k,
                             adasyn_beta=st.adasyn_beta, seed=st.seed)
    seconds["fold_prep"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    stage1 = cash_select(prepared, kinds=st.kinds, seed=st.seed)
    seconds["stage1"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    memo: dict[str, tuple[float, list[float], list[Scores]]] = {}

    def make_objective(kind: str):
        def objective(params: dict):
            key = _params_key(kind, params)
            if key not in memo:
                memo[key] = _eval_config(kind, params, prepared, st.seed)
            loss, fold_losses, _ = memo[key]
            return loss, fold_losses
        return objective

    # tune both top-ranked kinds, each warm-started at its own defaults
    tuned = []
    for row in stage1[:2]:
        kind = row["kind"]
        objective = make_objective(kind)
        space = search_space(kind)
        warm = default_config(kind).params
        if st.searcher == "random":
            result: SearchResult = random_search(objective, space,
                                                 n_trials=st.random_trials,
                                                 seed=st.seed, threads=st.threads)
            if row["objective"] <= result.best_value:
                result = SearchResult(best_params=dict(warm),
                                      best_value=row["objective"],
                                      trace=result.trace)
        else:
            result = pso_minimize(objective, space, swarm=st.swarm, iters=st.iters,
                                  seed=st.seed, warm_start=warm, threads=st.threads)
        key = _params_key(kind, result.best_params)
        if key not in memo:
            memo[key] = _eval_config(kind, result.best_params, prepared, st.seed)
        tuned.append({"kind": kind, "best_params": result.best_params,
                      "default_objective": row["objective"],
                      "tuned_objective": memo[key][0], "result": result,
                      "fold_scores": memo[key][2]})
        logger.info("stage 2: %s tuned objective %.5f (default %.5f)",
                    kind, memo[key][0], row["objective"])
    seconds["stage2"] = time.perf_counter() - t3

    rank = {row["kind"]: i for i, row in enumerate(stage1)}
    best = min(tuned, key=lambda c: (c["tuned_objective"], rank[c["kind"]]))
    winner = best["kind"]
    default_objective = best["default_objective"]
    best_params = best["best_params"]
    tuned_objective = best["tuned_objective"]
    fold_scores = best["fold_scores"]
    result = best["result"]
    stage2 = [{"kind": c["kind"], "best_params": c["best_params"],
               "default_objective": c["default_objective"],
               "tuned_objective": c["tuned_objective"]} for c in tuned]

    t4 = time.perf_counter()
    final_report, final_train = fit_preprocessor(
        ds_sel, outlier_threshold=st.outlier_threshold, balance=st.balance,
        adasyn_k=st.adasyn_k, adasyn_beta=st.adasyn_beta, seed=st.seed)
    model = fit_model(CandidateConfig(winner, best_params), final_train.features,
                      final_train.labels, seed=st.seed)
    seconds["final_fit"] = time.perf_counter() - t4
    seconds["total"] = time.perf_counter() - t0

    logger.info("winner %s: default objective %.5f, tuned %.5f",
                winner, default_objective, tuned_objective)
    return OfflineResult(winner_kind=winner, best_params=best_params,
                         default_objective=default_objective,
                         tuned_objective=tuned_objective, stage1=stage1,
                         stage2=stage2, trace=result.trace,
                         fold_scores=fold_scores, model=model,
                         preprocess=final_report, features=selection,
                         fold_plan=fold_plan, seconds=seconds, settings=st)
