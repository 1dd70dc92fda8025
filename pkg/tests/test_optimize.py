import numpy as np
import pytest

from ztids.autodp import apply_preprocessor
from ztids.dataset import stratified_kfold
from ztids.optimize import (OfflineSettings, PreparedFold, cash_select,
                            cv_objective, prepare_folds, run_automl_offline)
from ztids.models import serialize

from conftest import numeric_dataset, separable


def knn_fold(train_x, train_y, test_x, test_y):
    return PreparedFold(train=numeric_dataset(np.asarray(train_x, dtype=float),
                                              np.asarray(train_y)),
                        test=numeric_dataset(np.asarray(test_x, dtype=float),
                                             np.asarray(test_y)),
                        report=None)


def test_cv_objective_zero_on_separable_data():
    ds = separable(100, gap=4.0, seed=0)
    plan = stratified_kfold(ds, k=5, seed=0)
    loss = cv_objective("KNN", {"k": 1}, ds, plan, balance=False)
    assert loss == 0.0


def test_cv_objective_one_when_always_wrong():
    # identical features, majority class 0: KNN votes 0 on all-attack folds
    folds = [knn_fold([[0.0]] * 10, [0] * 8 + [1] * 2, [[0.0]] * 4, [1] * 4)
             for _ in range(2)]
    loss = cv_objective("KNN", {"k": 5}, None, None, prepared=folds)
    assert loss == 1.0


def test_cv_objective_mean_of_fold_losses():
    perfect = knn_fold([[0.0], [10.0]], [0, 1], [[0.0], [10.0]], [0, 1])
    half = knn_fold([[0.0], [10.0]], [0, 1],
                    [[0.0], [10.0], [10.1]], [1, 1, 0])  # tp=1 fp=1 fn=1
    loss = cv_objective("KNN", {"k": 1}, None, None, prepared=[perfect, half])
    assert loss == pytest.approx(0.25)


def test_cash_select_tie_breaks_by_kind_order():
    ds = separable(100, gap=4.0, seed=1)
    plan = stratified_kfold(ds, k=3, seed=0)
    prepared = prepare_folds(ds, plan, balance=False, seed=0)
    rows = cash_select(prepared, seed=0)
    assert [r["objective"] for r in rows] == [0.0, 0.0, 0.0, 0.0]
    assert [r["kind"] for r in rows] == ["KNN", "MLP", "RF", "GBDT"]


def test_cash_select_needs_two_kinds():
    ds = separable(60, seed=2)
    plan = stratified_kfold(ds, k=3, seed=0)
    prepared = prepare_folds(ds, plan, balance=False, seed=0)
    with pytest.raises(ValueError):
        cash_select(prepared, kinds=("RF",), seed=0)


def test_prepare_folds_fits_inside_each_fold():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(90, 3))
    y = np.array([0] * 60 + [1] * 30)
    ds = numeric_dataset(X, y)
    plan = stratified_kfold(ds, k=3, seed=1)
    prepared = prepare_folds(ds, plan, balance=True, seed=1)
    assert len(prepared) == 3
    for pf, (train_idx, test_idx) in zip(prepared, plan.folds):
        assert pf.report.fitted_rows == len(train_idx)
        assert pf.test.n_rows == len(test_idx)  # test rows never balanced
        n0 = int(np.sum(pf.train.labels == 0))
        n1 = int(np.sum(pf.train.labels == 1))
        assert n0 == n1  # train rows balanced
        assert pf.train.n_rows >= len(train_idx)


def test_offline_pipeline_dominates_defaults(flows_small):
    st = OfflineSettings(folds=3, swarm=3, iters=2, fe_swarm=3, fe_iters=1,
                         rfe_step=4, rfe_max_rows=400, fe_eval_row_cap=300,
                         seed=0)
    result = run_automl_offline(flows_small, st)
    top2 = result.stage1[:2]
    assert result.winner_kind in {r["kind"] for r in top2}
    assert result.tuned_objective <= top2[0]["objective"]
    assert result.tuned_objective <= top2[1]["objective"]
    assert result.tuned_objective <= result.default_objective
    assert {r["kind"] for r in result.stage2} == {r["kind"] for r in top2}
    assert result.model.kind == result.winner_kind
    assert result.model.n_features_in == len(result.features.kept)
    kept = flows_small.select_columns(result.features.kept)
    pred = result.model.predict(apply_preprocessor(result.preprocess, kept).features)
    assert set(np.unique(pred)) <= {0, 1}
    assert result.trace.best_so_far[-1] == result.tuned_objective


def test_offline_pipeline_deterministic():
    ds = separable(120, gap=1.0, seed=4)
    st = OfflineSettings(folds=3, swarm=2, iters=2, autofe=False, balance=False,
                         kinds=("KNN", "RF"), seed=7)
    a = run_automl_offline(ds, st)
    b = run_automl_offline(ds, st)
    assert a.winner_kind == b.winner_kind
    assert a.best_params == b.best_params
    assert a.stage2 == b.stage2
    assert serialize(a.model) == serialize(b.model)


def test_offline_random_searcher_keeps_defaults_when_better():
    ds = separable(140, gap=2.0, seed=5)
    st = OfflineSettings(folds=3, searcher="random", random_trials=3,
                         autofe=False, balance=False, kinds=("KNN", "MLP"),
                         seed=2)
    result = run_automl_offline(ds, st)
    assert result.tuned_objective <= result.default_objective
    assert result.tuned_objective <= min(r["objective"] for r in result.stage1[:2])


def test_settings_defaults():
    st = OfflineSettings()
    assert st.folds == 5
    assert st.swarm == 20 and st.iters == 30
    assert st.searcher == "pso"
    assert st.kinds == ("KNN", "MLP", "RF", "GBDT")
