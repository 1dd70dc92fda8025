"""Drift detectors, streaming learners, prequential evaluation, online model selection."""
import math

import numpy as np
import pytest

from ztids._rand import child_rng
from ztids.dataset import stream
from ztids.errors import ShapeMismatch
from ztids.online.automl import (
    OnlineSettings,
    build_online_learner,
    default_online_params,
    online_search_space,
    run_automl_online,
)
from ztids.online.drift import Adwin, Ddm
from ztids.online.ensembles import AdaptiveRandomForest, StreamingRandomPatches
from ztids.online.hoeffding import HoeffdingTree, hoeffding_bound
from ztids.online.neighbors import KnnAdwin
from ztids.online.prequential import prequential_evaluate
from ztids.simdata import make_drift_stream, make_flows


class _Oracle:
    """Always predicts the label it is about to be taught."""

    def __init__(self, labels):
        self.labels = list(labels)
        self.i = 0

    def predict_one(self, x):
        return self.labels[self.i]

    def learn_one(self, x, y, pred=None):
        self.i += 1


class _ConstantZero:
    def predict_one(self, x):
        return 0

    def learn_one(self, x, y, pred=None):
        pass


def threshold_stream(n, seed, n_features=2):
    # label is 1 iff feature 0 exceeds 0.5, feature 1 is noise
    rng = child_rng(seed, "ht-concept")
    X = rng.uniform(0.0, 1.0, size=(n, n_features))
    y = (X[:, 0] > 0.5).astype(np.int64)
    return X, y


# ---------------------------------------------------------------- Adwin

def test_adwin_constant_stream_never_flags():
    for value in (0.0, 0.5, 1.0):
        det = Adwin(delta=0.002)
        for _ in range(400):
            sig = det.update(value)
            assert sig.state == "none"
        assert det.mean == value


def test_adwin_step_flags_within_100():
    det = Adwin(delta=0.002)
    first = None
    states = set()
    for i in range(1000):
        sig = det.update(0.0 if i < 500 else 1.0)
        states.add(sig.state)
        if sig.is_drift and first is None:
            first = i
    assert first is not None
    assert 500 <= first < 600
    # warnings are a ddm concept
    assert states == {"none", "drift"}


def test_adwin_drift_drops_from_older_end():
    det = Adwin(delta=0.002)
    for i in range(1000):
        sig = det.update(0.0 if i < 500 else 1.0)
        if sig.is_drift:
            assert det.width < i + 1
            # every post-step one is newest data and survives the cut
            assert det.total == float(i + 1 - 500)
            assert det.cut_worse
            return
    pytest.fail("no drift on a 0/1 step stream")


def test_adwin_single_sample_stable():
    det = Adwin()
    assert det.update(1.0).state == "none"
    assert det.width == 1


def test_adwin_step_detection_rate():
    # 0 -> 1 step somewhere in the middle, flagged within 100 samples
    hits = 0
    for seed in range(100):
        rng = child_rng(seed, "adwin-step")
        step = int(rng.integers(300, 701))
        det = Adwin(delta=0.002)
        fired = None
        for i in range(1000):
            if det.update(0.0 if i < step else 1.0).is_drift:
                fired = i
                break
        if fired is not None and step <= fired < step + 100:
            hits += 1
    assert hits >= 99


def test_adwin_delta_validation():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            Adwin(delta=bad)


# ---------------------------------------------------------------- Ddm

def test_ddm_all_zero_stable():
    det = Ddm()
    for _ in range(200):
        assert det.update(0).state == "none"


def test_ddm_rate_step_warning_then_drift():
    # error rate 0.1 before index 1000, 0.5 after, via periodic patterns
    det = Ddm()
    first_warning = first_drift = None
    for i in range(2000):
        err = (i % 10 == 0) if i < 1000 else (i % 2 == 0)
        sig = det.update(int(err))
        if i < 1000:
            assert sig.state == "none"
        else:
            if sig.is_warning and first_warning is None:
                first_warning = i
            if sig.is_drift and first_drift is None:
                first_drift = i
    assert first_warning is not None and first_drift is not None
    assert 1000 < first_warning < first_drift


def test_ddm_burn_in():
    # no signal inside the burn-in window however bad the errors
    det = Ddm()
    for _ in range(29):
        assert det.update(1).state == "none"


def test_ddm_constant_error_rate_stable():
    det = Ddm()
    for _ in range(200):
        assert det.update(1).state == "none"


# ---------------------------------------------------------------- Hoeffding tree

def test_hoeffding_bound_closed_form():
    eps = hoeffding_bound(1e-7, 322.0)
    assert abs(eps - math.sqrt(math.log(1e7) / 644.0)) < 1e-12
    assert abs(eps - 0.1582) < 5e-4


def test_ht_empty_predicts_zero():
    ht = HoeffdingTree(3)
    assert ht.predict_one(np.zeros(3)) == 0
    assert ht.predict_proba_one(np.zeros(3)) == 0.0


def test_ht_learns_threshold_concept():
    X, y = threshold_stream(3000, seed=2)
    ht = HoeffdingTree(2)
    for i in range(2500):
        ht.learn_one(X[i], y[i])
    assert ht.n_nodes > 1
    hits = sum(ht.predict_one(X[i]) == y[i] for i in range(2500, 3000))
    assert hits / 500 > 0.9


def test_ht_node_count_non_decreasing():
    X, y = threshold_stream(3000, seed=4)
    ht = HoeffdingTree(2)
    prev = ht.n_nodes
    for i in range(3000):
        ht.learn_one(X[i], y[i])
        if i % 100 == 99:
            assert ht.n_nodes >= prev
            prev = ht.n_nodes


def test_ht_splits_satisfy_hoeffding_condition():
    X, y = threshold_stream(4000, seed=6)
    ht = HoeffdingTree(2)
    for i in range(4000):
        ht.learn_one(X[i], y[i])
    assert ht.split_records
    # every split grew the tree by one internal node and one extra leaf
    assert ht.n_nodes == 1 + 2 * len(ht.split_records)
    for g1, g2, eps, w in ht.split_records:
        assert w > 0
        assert g1 >= g2
        assert g1 - g2 > eps or eps < ht.tie_threshold


# ---------------------------------------------------------------- shared learner contracts

def test_streaming_learners_reject_wrong_width():
    for kind in ("HT", "KNN_ADWIN", "ARF", "SRP"):
        learner = build_online_learner(kind, {}, n_features=4, seed=0)
        with pytest.raises(ShapeMismatch):
            learner.predict_one(np.zeros(3))
        with pytest.raises(ShapeMismatch):
            learner.learn_one(np.zeros(5), 1)


def test_knn_adwin_buffer_cap():
    assert KnnAdwin(4).max_window == 1000
    rng = child_rng(0, "knn-cap")
    knn = KnnAdwin(2, k=3, max_window=50)
    for i in range(200):
        x = rng.normal(size=2)
        knn.learn_one(x, int(i % 2))
        assert knn._count <= 50
    assert knn._count == 50


def test_knn_adwin_empty_predicts_zero():
    assert KnnAdwin(2).predict_one(np.ones(2)) == 0


def test_knn_adwin_learns_clusters():
    rng = child_rng(1, "knn-clusters")
    knn = KnnAdwin(2, k=3)
    for _ in range(200):
        y = int(rng.random() < 0.5)
        x = rng.normal(loc=3.0 * y, scale=0.3, size=2)
        knn.learn_one(x, y)
    assert knn.predict_one(np.array([0.0, 0.0])) == 0
    assert knn.predict_one(np.array([3.0, 3.0])) == 1


# ---------------------------------------------------------------- ensembles

def test_ensemble_subset_sizes():
    arf = AdaptiveRandomForest(10, n_models=4, seed=0)
    for m in arf.members:
        assert len(m.subset) == 4  # ceil(sqrt(10))
        assert len(set(m.subset.tolist())) == len(m.subset)
        assert all(0 <= j < 10 for j in m.subset)
    srp = StreamingRandomPatches(10, n_models=4, seed=0)
    for m in srp.members:
        assert len(m.subset) == 6  # ceil(0.6 * 10)


def test_ensemble_vote_is_majority():
    X, y = threshold_stream(600, seed=8, n_features=4)
    arf = AdaptiveRandomForest(4, n_models=5, seed=3)
    for i in range(600):
        arf.learn_one(X[i], y[i])
    probes = X[:20]
    for x in probes:
        votes = [m.tree.predict_one(x[m.subset]) for m in arf.members]
        assert arf.predict_one(x) == int(sum(votes) / 5 >= 0.5)


def test_ensemble_single_member_swing():
    # dropping one vote flips the decision only when the margin is one vote
    X, y = threshold_stream(600, seed=9, n_features=4)
    arf = AdaptiveRandomForest(4, n_models=5, seed=5)
    for i in range(600):
        arf.learn_one(X[i], y[i])
    n = len(arf.members)
    for x in X[:30]:
        votes = [m.tree.predict_one(x[m.subset]) for m in arf.members]
        full = int(sum(votes) / n >= 0.5)
        for j in range(n):
            rest = sum(votes) - votes[j]
            if int(rest / (n - 1) >= 0.5) != full:
                assert abs(2 * sum(votes) - n) <= 2


# ---------------------------------------------------------------- prequential

def test_prequential_oracle_scores_one():
    rng = child_rng(2, "oracle")
    labels = (rng.random(120) < 0.4).astype(int)
    X = rng.normal(size=(120, 3))
    curve = prequential_evaluate(_Oracle(labels), zip(X, labels), window=25)
    assert curve.n_samples == 120
    assert len(curve.running_accuracy) == 120
    assert len(curve.windowed_accuracy) == 120
    assert np.all(curve.running_accuracy == 1.0)
    assert np.all(curve.windowed_accuracy == 1.0)
    assert curve.scores.accuracy == 1.0


def test_prequential_constant_learner_matches_class_ratio():
    rng = child_rng(3, "ratio")
    labels = np.array([0] * 70 + [1] * 30)
    rng.shuffle(labels)
    X = np.zeros((100, 2))
    curve = prequential_evaluate(_ConstantZero(), zip(X, labels), window=10)
    assert curve.running_accuracy[-1] == 0.7
    assert np.all(curve.running_accuracy >= 0.0)
    assert np.all(curve.running_accuracy <= 1.0)


def test_prequential_empty_stream_raises():
    with pytest.raises(ValueError):
        prequential_evaluate(_ConstantZero(), iter(()), window=10)


def test_prequential_curves_deterministic():
    ds, _ = make_drift_stream(n_rows=1500, n_features=6, seed=5)
    runs = []
    for _ in range(2):
        learner = build_online_learner("ARF", {"n_models": 3}, ds.n_features, seed=7)
        runs.append(prequential_evaluate(learner, stream(ds), window=200))
    a, b = runs
    assert np.array_equal(a.running_accuracy, b.running_accuracy)
    assert np.array_equal(a.windowed_accuracy, b.windowed_accuracy)
    assert a.drift_indices == b.drift_indices


def test_arf_recovers_after_concept_flip():
    ds, drift_at = make_drift_stream(n_rows=4000, n_features=10, seed=11)
    arf = build_online_learner("ARF", {"n_models": 5}, ds.n_features, seed=1)
    curve = prequential_evaluate(arf, stream(ds), window=300)
    w = curve.windowed_accuracy
    pre = w[drift_at - 1]
    dip = drift_at + int(np.argmin(w[drift_at:]))
    assert w[dip] < pre - 0.02
    recovered = next(i for i in range(dip, len(w)) if w[i] >= pre - 0.02)
    assert recovered - drift_at <= 2000
    assert any(drift_at < d <= recovered for d in curve.drift_indices)


# ---------------------------------------------------------------- online model selection

def test_default_online_params():
    assert default_online_params("HT") == {"grace_period": 200, "tie_threshold": 0.05}
    assert default_online_params("KNN_ADWIN") == {"k": 5, "max_window": 1000}
    assert default_online_params("ARF") == {"n_models": 5, "drift_detector": "ADWIN"}
    assert default_online_params("SRP") == {"n_models": 5, "drift_detector": "ADWIN"}
    with pytest.raises(ValueError):
        default_online_params("EFDT")


def test_online_search_space_bounds():
    for kind in ("ARF", "SRP"):
        dims = {d.name: d for d in online_search_space(kind).dims}
        assert dims["n_models"].kind == "integer"
        assert (dims["n_models"].lo, dims["n_models"].hi) == (3, 10)
        assert dims["drift_detector"].kind == "categorical"
        assert dims["drift_detector"].options == ("ADWIN", "DDM")
    dims = {d.name: d for d in online_search_space("HT").dims}
    assert (dims["grace_period"].lo, dims["grace_period"].hi) == (50, 500)
    assert (dims["tie_threshold"].lo, dims["tie_threshold"].hi) == (0.01, 0.2)
    dims = {d.name: d for d in online_search_space("KNN_ADWIN").dims}
    assert (dims["k"].lo, dims["k"].hi) == (3, 15)
    assert (dims["max_window"].lo, dims["max_window"].hi) == (200, 2000)
    with pytest.raises(ValueError):
        online_search_space("OASW")


def test_build_online_learner_maps_params():
    ht = build_online_learner("HT", {"grace_period": 77}, 5)
    assert isinstance(ht, HoeffdingTree) and ht.grace_period == 77
    knn = build_online_learner("KNN_ADWIN", {"k": 9}, 5)
    assert isinstance(knn, KnnAdwin) and knn.k == 9
    arf = build_online_learner("ARF", {"n_models": 3, "drift_detector": "DDM"}, 5)
    assert isinstance(arf, AdaptiveRandomForest)
    assert arf.n_models == 3 and arf.drift_detector == "DDM"
    srp = build_online_learner("SRP", {}, 5)
    assert isinstance(srp, StreamingRandomPatches) and srp.n_models == 5
    with pytest.raises(ValueError):
        build_online_learner("AONN", {}, 5)


def test_run_automl_online_tunes_top_two():
    ds = make_flows(n_rows=400, seed=5)
    st = OnlineSettings(candidates=("HT", "KNN_ADWIN"), window=100,
                        swarm=2, iters=2, seed=3)
    res = run_automl_online(ds, st)
    assert sorted(res.tuned) == ["HT", "KNN_ADWIN"]
    assert len(res.stage1) == 2
    objs = [r["objective"] for r in res.stage1]
    assert objs == sorted(objs)
    for kind, row in res.tuned.items():
        assert row["accuracy"] >= row["default_accuracy"]
        assert f"{kind}-default" in res.curves
        assert f"{kind}-tuned" in res.curves
    assert res.winner_kind in res.tuned
    assert res.tuned_accuracy == max(r["accuracy"] for r in res.tuned.values())
    assert res.tuned_accuracy >= res.default_accuracy
