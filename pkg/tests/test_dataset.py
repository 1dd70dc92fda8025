import numpy as np
import pytest

from ztids.dataset import Dataset, load_csv, stratified_kfold, stream
from ztids.errors import (EmptyFile, MissingLabelColumn, RaggedRow,
                          TooFewSamplesPerClass)

from conftest import numeric_dataset


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_binarizes_labels(tmp_path):
    p = write(tmp_path, "a,b,Label\n1,2,BENIGN\n3,4,DoS\n5,6,BENIGN\n")
    ds = load_csv(p)
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.feature_names == ["a", "b"]
    assert ds.features.tolist() == [[1, 2], [3, 4], [5, 6]]


def test_infinity_token_becomes_missing(tmp_path):
    p = write(tmp_path, "Flow Bytes/s,Label\nInfinity,BENIGN\n2.5,DoS\n")
    ds = load_csv(p)
    assert np.isnan(ds.features[0, 0])
    assert ds.features[1, 0] == 2.5
    assert ds.column_kinds == ["numeric"]


def test_nan_token_and_negative_duration(tmp_path):
    p = write(tmp_path, "Flow Duration,x,Label\n-1,7,BENIGN\nNaN,8,DoS\n3,9,DoS\n")
    ds = load_csv(p)
    assert np.isnan(ds.features[0, 0])
    assert np.isnan(ds.features[1, 0])
    assert ds.features[2, 0] == 3.0
    assert not np.isnan(ds.features[:, 1]).any()


def test_categorical_column_detected(tmp_path):
    p = write(tmp_path, "proto,x,Label\ntcp,1,BENIGN\nudp,2,DoS\ntcp,3,DoS\n")
    ds = load_csv(p)
    assert ds.column_kinds == ["categorical", "numeric"]
    assert ds.raw_categorical is not None
    assert list(ds.raw_categorical[0]) == ["tcp", "udp", "tcp"]
    assert np.isnan(ds.features[:, 0]).all()


def test_custom_benign_labels(tmp_path):
    p = write(tmp_path, "x,Label\n1,Normal\n2,Scan\n3,Normal\n")
    ds = load_csv(p, benign_labels=("Normal",))
    assert ds.labels.tolist() == [0, 1, 0]


def test_missing_label_column(tmp_path):
    p = write(tmp_path, "a,b\n1,2\n")
    with pytest.raises(MissingLabelColumn):
        load_csv(p, label_column="Label")


def test_empty_and_header_only_files(tmp_path):
    with pytest.raises(EmptyFile):
        load_csv(write(tmp_path, "", name="e.csv"))
    with pytest.raises(EmptyFile):
        load_csv(write(tmp_path, "a,Label\n", name="h.csv"))


def test_ragged_row(tmp_path):
    p = write(tmp_path, "a,b,Label\n1,2,BENIGN\n3,DoS\n")
    with pytest.raises(RaggedRow):
        load_csv(p)


def test_dataset_invariants_enforced():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2, dtype=np.int64), ["a", "b"],
                ["numeric", "numeric"])
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 2)), np.array([0, 2]), ["a", "b"],
                ["numeric", "numeric"])


def test_kfold_balanced_hundred_rows():
    y = np.array([0] * 50 + [1] * 50)
    ds = numeric_dataset(np.arange(100.0), y)
    plan = stratified_kfold(ds, 5, seed=1)
    for train, test in plan.folds:
        assert len(test) == 20
        assert int(np.sum(ds.labels[test] == 0)) == 10
        assert int(np.sum(ds.labels[test] == 1)) == 10
        assert len(train) == 80


def test_kfold_deterministic():
    ds = numeric_dataset(np.arange(60.0), np.arange(60) % 2)
    a = stratified_kfold(ds, 4, seed=9)
    b = stratified_kfold(ds, 4, seed=9)
    for (tra, tea), (trb, teb) in zip(a.folds, b.folds):
        assert np.array_equal(tra, trb) and np.array_equal(tea, teb)
    c = stratified_kfold(ds, 4, seed=10)
    assert any(not np.array_equal(tea, tec)
               for (_, tea), (_, tec) in zip(a.folds, c.folds))


def test_kfold_too_few_samples():
    y = np.array([0] * 20 + [1] * 4)
    ds = numeric_dataset(np.arange(24.0), y)
    with pytest.raises(TooFewSamplesPerClass):
        stratified_kfold(ds, 5, seed=0)


def test_kfold_partition_laws():
    for seed in range(15):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 7))
        n1 = int(rng.integers(k, 60))
        n0 = int(rng.integers(k, 60))
        y = np.concatenate([np.zeros(n0, dtype=np.int64),
                            np.ones(n1, dtype=np.int64)])
        rng.shuffle(y)
        n = n0 + n1
        ds = numeric_dataset(rng.normal(size=n), y)
        plan = stratified_kfold(ds, k, seed=seed)
        assert plan.k == k and len(plan.folds) == k

        seen = np.concatenate([test for _, test in plan.folds])
        assert sorted(seen.tolist()) == list(range(n))

        train_hits = np.zeros(n, dtype=int)
        for train, test in plan.folds:
            assert set(train.tolist()).isdisjoint(test.tolist())
            train_hits[train] += 1
            # stratification: per-fold class counts within 1 of n_cls/k
            for cls, n_cls in ((0, n0), (1, n1)):
                got = int(np.sum(y[test] == cls))
                assert n_cls // k <= got <= -(-n_cls // k)
        assert (train_hits == k - 1).all()


def test_stream_order_and_replay():
    X = np.arange(6.0).reshape(3, 2)
    ds = numeric_dataset(X, np.array([0, 1, 0]))
    first = [(x.tolist(), y) for x, y in stream(ds)]
    second = [(x.tolist(), y) for x, y in stream(ds)]
    assert first == second
    assert first == [([0, 1], 0), ([2, 3], 1), ([4, 5], 0)]


def test_stream_empty_dataset():
    ds = Dataset(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), ["a", "b"],
                 ["numeric", "numeric"])
    assert list(stream(ds)) == []


def test_load_stream_round_trip(tmp_path):
    p = write(tmp_path, "a,b,Label\n1.5,2,BENIGN\n3,4.25,DoS\n")
    ds = load_csv(p)
    rows = list(stream(ds))
    assert [y for _, y in rows] == [0, 1]
    assert rows[0][0].tolist() == [1.5, 2.0]
    assert rows[1][0].tolist() == [3.0, 4.25]


def test_select_rows_and_columns():
    X = np.arange(12.0).reshape(4, 3)
    ds = Dataset(X, np.array([0, 1, 0, 1]), ["a", "b", "c"],
                 ["numeric", "categorical", "numeric"],
                 raw_categorical={1: np.array(["x", "y", "x", "z"], dtype=object)})
    sub = ds.select_rows([2, 0])
    assert sub.features.tolist() == [[6, 7, 8], [0, 1, 2]]
    assert list(sub.raw_categorical[1]) == ["x", "x"]
    cols = ds.select_columns([1, 2])
    assert cols.feature_names == ["b", "c"]
    assert 0 in cols.raw_categorical  # column 1 remapped to position 0
    dropped = ds.select_columns([0, 2])
    assert dropped.raw_categorical is None
