"""Automated feature engineering.

Two stages: a Pearson-correlation redundancy filter, then recursive feature
elimination ranked by a 50-tree random forest, with the kept-feature count
chosen by particle swarm over [ceil(0.1 * M), M]. The count search evaluates
a fixed small forest by cross-validated 1 - F1.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._rand import child_rng
from .dataset import Dataset, FoldPlan
from .errors import InvalidTargetCount
from .metrics import score
from .models.forest import RandomForestModel
from .search import Dim, HyperparameterSpace, SearchTrace, pso_minimize

logger = logging.getLogger(__name__)

RANKER_TREES = 50


@dataclass
class FeatureSelection:
    kept: list[int]
    n_selected: int
    dropped_redundant: list[tuple[int, int, float]] = field(default_factory=list)
    ranking: dict[int, int] | None = None
    search_trace: SearchTrace | None = None

    def as_dict(self) -> dict:
        return {
            "kept": list(self.kept),
            "n_selected": self.n_selected,
            "dropped_redundant": [[a, b, r] for a, b, r in self.dropped_redundant],
            "ranking": {str(k): v for k, v in self.ranking.items()} if self.ranking else None,
            "search_trace": self.search_trace.as_dict() if self.search_trace else None,
        }


def pearson_filter(ds: Dataset, threshold: float = 0.9) -> FeatureSelection:
    """Drop the later column of every highly correlated pair (|r| >= threshold).

    Pairs are scanned in index order against still-kept columns only, so a
    chain a~b~c keeps a and drops b and c. Constant columns correlate with
    nothing (r treated as 0).
    """
    X = ds.features
    m = X.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(X, rowvar=False)
    corr = np.nan_to_num(corr, nan=0.0)
    alive = np.ones(m, dtype=bool)
    dropped: list[tuple[int, int, float]] = []
    for i in range(m):
        if not alive[i]:
            continue
        for j in range(i + 1, m):
            if alive[j] and abs(corr[i, j]) >= threshold:
                alive[j] = False
                dropped.append((j, i, float(abs(corr[i, j]))))
    kept = [int(i) for i in np.flatnonzero(alive)]
    return FeatureSelection(kept=kept, n_selected=len(kept), dropped_redundant=dropped)


def _ranker(X: np.ndarray, y: np.ndarray, seed: int) -> np.ndarray:
    rf = RandomForestModel(n_estimators=RANKER_TREES, seed=seed)
    rf.fit(X, y)
    return rf.feature_importances_


def _subsample(X, y, max_rows, seed):
    if max_rows is None or X.shape[0] <= max_rows:
        return X, y
    rng = child_rng(seed, "rfe-rows")
    idx = np.sort(rng.permutation(X.shape[0])[:max_rows])
    return X[idx], y[idx]


def elimination_ranking(X, y, step: int = 1, seed: int = 0,
                        max_rows: int | None = None,
                        stop_at: int = 1) -> dict[int, int]:
    """Strict total order on features: rank 1 survives elimination longest.

    Each round refits the ranking forest on the surviving columns and drops
    the `step` least important (ties break toward the lower column index),
    until stop_at remain. Survivors are ranked by the last fit's importance
    order; when stop_at equals the column count that single fit is the only
    one made.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64).ravel()
    X, y = _subsample(X, y, max_rows, seed)
    m = X.shape[1]
    active = list(range(m))
    rank: dict[int, int] = {}
    bottom = m
    last: tuple[np.ndarray, list[int]] | None = None
    while len(active) > stop_at:
        imp = _ranker(X[:, active], y, seed)
        last = (imp, list(active))
        drop = min(step, len(active) - stop_at)
        order = np.argsort(imp, kind="stable")
        victims = [active[i] for i in order[:drop]]
        for v in victims:
            rank[v] = bottom
            bottom -= 1
        active = [a for a in active if a not in victims]
    if len(active) == 1:
        rank[active[0]] = 1
        return rank
    if last is None:
        imp = _ranker(X[:, active], y, seed)
    else:
        pos = {c: p for p, c in enumerate(last[1])}
        imp = np.array([last[0][pos[c]] for c in active])
    for r, i in enumerate(np.argsort(-imp, kind="stable")):
        rank[active[i]] = r + 1
    return rank


def rfe(ds: Dataset, n_select: int, step: int = 1, seed: int = 0,
        max_rows: int | None = None) -> FeatureSelection:
    """Keep the n_select features that survive recursive elimination longest."""
    m = ds.n_features
    if not 1 <= n_select <= m:
        raise InvalidTargetCount(f"n_select={n_select} outside [1, {m}]")
    ranking = elimination_ranking(ds.features, ds.labels, step=step, seed=seed,
                                  max_rows=max_rows, stop_at=n_select)
    kept = sorted(j for j, r in ranking.items() if r <= n_select)
    return FeatureSelection(kept=kept, n_selected=n_select, ranking=ranking)


def optimize_feature_count(ds: Dataset, fold_plan: FoldPlan, swarm: int = 10,
                           iters: int = 10, step: int = 1, seed: int = 0,
                           max_rows: int | None = None,
                           eval_row_cap: int | None = None) -> FeatureSelection:
    """Swarm-search the kept-feature count over [ceil(0.1 m), m].

    One elimination ranking is computed up front and every candidate count
    reuses it; the warm-start particle sits at the full feature set, so the
    chosen count never scores worse than keeping everything. The evaluation
    model is a 50-tree depth-10 forest scored by mean CV 1 - F1.
    """
    m = ds.n_features
    lo = max(1, math.ceil(0.1 * m))
    if lo >= m:
        sel = rfe(ds, m, step=step, seed=seed, max_rows=max_rows)
        return sel
    ranking = elimination_ranking(ds.features, ds.labels, step=step, seed=seed,
                                  max_rows=max_rows)
    by_rank = sorted(ranking, key=ranking.get)

    cache: dict[int, tuple[float, list[float]]] = {}

    def objective(params: dict):
        n = int(params["n_features"])
        if n not in cache:
            cols = sorted(by_rank[:n])
            losses = []
            for train_idx, test_idx in fold_plan.folds:
                Xtr, ytr = ds.features[train_idx][:, cols], ds.labels[train_idx]
                Xtr, ytr = _subsample(Xtr, ytr, eval_row_cap, seed)
                rf = RandomForestModel(n_estimators=RANKER_TREES, max_depth=10,
                                       seed=seed)
                rf.fit(Xtr, ytr)
                pred = rf.predict(ds.features[test_idx][:, cols])
                losses.append(1.0 - score(ds.labels[test_idx], pred).f1)
            cache[n] = (float(np.mean(losses)), losses)
        return cache[n]

    space = HyperparameterSpace([Dim("n_features", "integer", lo, m)])
    result = pso_minimize(objective, space, swarm=swarm, iters=iters,
                          seed=seed, warm_start={"n_features": m})
    best_n = int(result.best_params["n_features"])
    kept = sorted(by_rank[:best_n])
    logger.info("feature count search kept %d of %d columns (loss %.5f)",
                best_n, m, result.best_value)
    return FeatureSelection(kept=kept, n_selected=best_n, ranking=ranking,
                            search_trace=result.trace)


def select_features(ds: Dataset, fold_plan: FoldPlan, pearson_threshold: float = 0.9,
                    swarm: int = 10, iters: int = 10, step: int = 1, seed: int = 0,
                    max_rows: int | None = None, eval_row_cap: int | None = None,
                    search_count: bool = True) -> FeatureSelection:
    """Redundancy filter, then ranked elimination with a searched count.

    Returned indices refer to the input dataset's columns.
    """
    stage1 = pearson_filter(ds, threshold=pearson_threshold)
    reduced = ds.select_columns(stage1.kept)
    fold_plan_r = FoldPlan(k=fold_plan.k, seed=fold_plan.seed,
                           folds=list(fold_plan.folds))
    if search_count:
        stage2 = optimize_feature_count(reduced, fold_plan_r, swarm=swarm,
                                        iters=iters, step=step, seed=seed,
                                        max_rows=max_rows, eval_row_cap=eval_row_cap)
    else:
        stage2 = rfe(reduced, reduced.n_features, step=step, seed=seed,
                     max_rows=max_rows)
    back = {local: orig for local, orig in enumerate(stage1.kept)}
    kept = sorted(back[j] for j in stage2.kept)
    ranking = ({back[j]: r for j, r in stage2.ranking.items()}
               if stage2.ranking else None)
    return FeatureSelection(kept=kept, n_selected=len(kept),
                            dropped_redundant=stage1.dropped_redundant,
                            ranking=ranking, search_trace=stage2.search_trace)
