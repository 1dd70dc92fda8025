import numpy as np
import pytest

from ztids.autodp import (PreprocessReport, apply_encoding, apply_imputer,
                          apply_preprocessor, balance_adasyn, denormalize,
                          fit_encoding, fit_imputer, fit_normalization,
                          fit_preprocessor, normalize, outlier_fraction,
                          select_normalization)
from ztids.dataset import Dataset
from ztids.errors import DegenerateColumn, MinorityTooSmall

from conftest import numeric_dataset


def cat_dataset(values, extra_numeric=None):
    n = len(values)
    cols = [np.full(n, np.nan)]
    names = ["proto"]
    kinds = ["categorical"]
    if extra_numeric is not None:
        cols.append(np.asarray(extra_numeric, dtype=np.float64))
        names.append("x")
        kinds.append("numeric")
    X = np.column_stack(cols)
    y = np.arange(n) % 2
    return Dataset(X, y, names, kinds,
                   raw_categorical={0: np.array(values, dtype=object)})


def test_encoding_first_appearance_order():
    ds = cat_dataset(["tcp", "udp", "tcp"])
    enc = fit_encoding(ds)
    assert enc == {0: {"tcp": 0, "udp": 1}}
    out = apply_encoding(ds, enc)
    assert out.features[:, 0].tolist() == [0, 1, 0]
    assert out.raw_categorical is None


def test_encoding_all_numeric_is_empty():
    ds = numeric_dataset(np.arange(8.0))
    assert fit_encoding(ds) == {}


def test_encoding_unseen_value_gets_reserved_code():
    train = cat_dataset(["tcp", "udp", "tcp"])
    enc = fit_encoding(train)
    test = cat_dataset(["sctp", "udp"])
    out = apply_encoding(test, enc)
    assert out.features[:, 0].tolist() == [2, 1]  # vocab size 2 = unknown


def test_imputer_median_of_observed():
    ds = numeric_dataset(np.array([1.0, 2.0, np.nan, 4.0]))
    med = fit_imputer(ds)
    assert med == [2.0]
    filled = apply_imputer(ds, med)
    assert filled.features[:, 0].tolist() == [1, 2, 2, 4]


def test_imputer_even_count_median():
    ds = numeric_dataset(np.array([3.0, 1.0]))
    assert fit_imputer(ds) == [2.0]


def test_imputer_all_missing_column():
    ds = numeric_dataset(np.array([np.nan, np.nan]))
    with pytest.raises(DegenerateColumn):
        fit_imputer(ds)


def test_normalization_choice_minmax_without_outliers():
    rng = np.random.default_rng(0)
    ds = numeric_dataset(rng.uniform(0, 100, size=(200, 3)))
    choice, frac = select_normalization(ds, threshold=0.01)
    assert choice == "minmax"
    assert frac == 0.0


def test_normalization_choice_zscore_with_outliers():
    # 99 values in [0,1] plus one at 1e6: outlier fraction 0.01 > 0.005
    rng = np.random.default_rng(1)
    col = np.concatenate([rng.uniform(0, 1, 99), [1e6]])
    ds = numeric_dataset(col)
    choice, frac = select_normalization(ds, threshold=0.005)
    assert choice == "zscore"
    assert frac == pytest.approx(0.01)


def test_constant_column_contributes_no_outliers():
    assert outlier_fraction(np.full((50, 1), 7.0)) == 0.0
    rng = np.random.default_rng(2)
    X = np.column_stack([np.full(100, 7.0), rng.uniform(0, 1, 100)])
    choice, _ = select_normalization(numeric_dataset(X), threshold=0.01)
    assert choice == "minmax"


def test_zscore_population_stddev():
    ds = numeric_dataset(np.array([0.0, 10.0]))
    params = fit_normalization(ds, "zscore")
    assert params == [(5.0, 5.0)]  # population stddev, not sample
    out = normalize(ds, "zscore", params)
    assert out.features[:, 0].tolist() == [-1.0, 1.0]


def test_minmax_values():
    ds = numeric_dataset(np.array([2.0, 4.0, 6.0]))
    params = fit_normalization(ds, "minmax")
    out = normalize(ds, "minmax", params)
    assert out.features[:, 0].tolist() == [0.0, 0.5, 1.0]


def test_constant_column_maps_to_zero():
    ds = numeric_dataset(np.array([7.0, 7.0, 7.0]))
    for choice in ("zscore", "minmax"):
        params = fit_normalization(ds, choice)
        out = normalize(ds, choice, params)
        assert out.features[:, 0].tolist() == [0.0, 0.0, 0.0]


def test_test_rows_use_train_params():
    train = numeric_dataset(np.array([0.0, 10.0]))
    params = fit_normalization(train, "minmax")
    test = numeric_dataset(np.array([-5.0, 20.0]))
    out = normalize(test, "minmax", params)
    assert out.features[:, 0].tolist() == [-0.5, 2.0]  # may exit [0,1]


def test_normalize_denormalize_round_trip():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = rng.normal(3.0, 12.0, size=(40, 4))
        X[:, 3] = 7.0  # constant column survives the round trip too
        ds = numeric_dataset(X)
        for choice in ("zscore", "minmax"):
            params = fit_normalization(ds, choice)
            out = normalize(ds, choice, params)
            back = denormalize(choice, params, out.features)
            assert np.max(np.abs(back - X) / np.maximum(np.abs(X), 1.0)) < 1e-9


def test_adasyn_count_formula():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(100, 2))
    y = np.array([0] * 90 + [1] * 10)
    ds = numeric_dataset(X, y)
    out = balance_adasyn(ds, k_neighbors=5, beta=1.0, seed=0)
    assert out.n_rows == 180
    assert int(np.sum(out.labels == 1)) == 90
    assert int(np.sum(out.labels == 0)) == 90


def test_adasyn_already_balanced_returns_input():
    ds = numeric_dataset(np.arange(20.0), np.arange(20) % 2)
    out = balance_adasyn(ds, seed=0)
    assert out is ds


def test_adasyn_count_law_property():
    # G = floor((n_maj - n_min) * beta), minority label preserved
    for seed in range(12):
        rng = np.random.default_rng(40 + seed)
        n_min = int(rng.integers(7, 25))
        n_maj = n_min + int(rng.integers(1, 60))
        beta = float(rng.uniform(0.2, 1.0))
        X = rng.normal(size=(n_maj + n_min, 3))
        y = np.array([0] * n_maj + [1] * n_min)
        ds = numeric_dataset(X, y)
        out = balance_adasyn(ds, k_neighbors=5, beta=beta, seed=seed)
        G = int(np.floor((n_maj - n_min) * beta))
        assert out.n_rows == ds.n_rows + G
        assert int(np.sum(out.labels == 1)) == n_min + G


def test_adasyn_originals_prefix_and_segments():
    rng = np.random.default_rng(5)
    Xmaj = rng.normal(5.0, 0.3, size=(60, 2))
    Xmin = rng.normal(0.0, 0.3, size=(12, 2))
    X = np.vstack([Xmaj, Xmin])
    y = np.array([0] * 60 + [1] * 12)
    ds = numeric_dataset(X, y)
    out = balance_adasyn(ds, k_neighbors=5, beta=1.0, seed=7)
    assert np.array_equal(out.features[:72], X)
    assert np.array_equal(out.labels[:72], y)
    synth = out.features[72:]
    assert (out.labels[72:] == 1).all()
    # every synthetic row sits on a segment between two minority rows
    for srow in synth:
        found = False
        for i in range(len(Xmin)):
            d = srow - Xmin[i]
            for j in range(len(Xmin)):
                if i == j:
                    continue
                e = Xmin[j] - Xmin[i]
                denom = float(e @ e)
                if denom == 0:
                    continue
                lam = float(d @ e) / denom
                if -1e-9 <= lam <= 1 + 1e-9 and np.allclose(srow, Xmin[i] + lam * e,
                                                            atol=1e-9):
                    found = True
                    break
            if found:
                break
        assert found


def test_adasyn_uniform_fallback_when_no_majority_neighbors():
    # minority cluster far from majority: every density ratio is 0
    rng = np.random.default_rng(6)
    Xmaj = rng.normal(100.0, 0.1, size=(30, 2))
    Xmin = rng.normal(0.0, 0.1, size=(10, 2))
    ds = numeric_dataset(np.vstack([Xmaj, Xmin]),
                         np.array([0] * 30 + [1] * 10))
    out = balance_adasyn(ds, k_neighbors=5, beta=1.0, seed=1)
    assert out.n_rows == 60
    assert (out.labels[40:] == 1).all()


def test_adasyn_minority_too_small():
    ds = numeric_dataset(np.arange(20.0), np.array([0] * 17 + [1] * 3))
    with pytest.raises(MinorityTooSmall):
        balance_adasyn(ds, k_neighbors=5, seed=0)


def test_adasyn_deterministic():
    rng = np.random.default_rng(8)
    ds = numeric_dataset(rng.normal(size=(50, 2)),
                         np.array([0] * 40 + [1] * 10))
    a = balance_adasyn(ds, seed=4)
    b = balance_adasyn(ds, seed=4)
    assert np.array_equal(a.features, b.features)
    c = balance_adasyn(ds, seed=5)
    assert not np.array_equal(a.features, c.features)


def test_fit_apply_separation():
    rng = np.random.default_rng(9)
    train = numeric_dataset(rng.normal(size=(80, 3)),
                            np.array([0] * 60 + [1] * 20))
    report, _ = fit_preprocessor(train, balance=True, seed=0)
    before = report.as_dict()
    apply_preprocessor(report, train)
    test = numeric_dataset(rng.normal(size=(30, 3)), np.arange(30) % 2)
    applied = apply_preprocessor(report, test)
    assert report.as_dict() == before  # apply never refits
    assert applied.n_rows == 30  # and never balances


def test_preprocess_report_round_trip():
    ds = cat_dataset(["tcp", "udp", "tcp", "icmp"], [1.0, np.nan, 3.0, 500.0])
    report, out = fit_preprocessor(ds, balance=False, seed=0)
    doc = report.as_dict()
    back = PreprocessReport.from_dict(doc)
    assert back.as_dict() == doc
    again = apply_preprocessor(back, ds)
    assert np.array_equal(again.features, out.features)


def test_pipeline_output_fully_numeric_and_balanced():
    rng = np.random.default_rng(10)
    n = 80
    vals = np.where(rng.random(n) < 0.5, "tcp", "udp").astype(object)
    x = rng.uniform(0, 50, n)
    x[rng.random(n) < 0.1] = np.nan
    X = np.column_stack([np.full(n, np.nan), x])
    y = np.array([0] * 60 + [1] * 20)
    ds = Dataset(X, y, ["proto", "x"], ["categorical", "numeric"],
                 raw_categorical={0: vals})
    report, out = fit_preprocessor(ds, balance=True, seed=0)
    assert not np.isnan(out.features).any()
    assert int(np.sum(out.labels == 0)) == int(np.sum(out.labels == 1))
    assert report.balance is not None
    assert report.balance.n_synthesized == 40
