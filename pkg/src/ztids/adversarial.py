"""Evasion attacks on the detector, plus the detect-filter-retrain drill.

Gradient attacks (fast gradient sign and its iterated variant) need input
gradients, so against tree ensembles they run on a stand-in network trained
on the same data and transfer. The decision-tree attack reads the victim's
own split structure. All attacks operate in the model's normalized feature
space and keep rows inside the feature box observed in training.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._rand import child_rng
from .autodp import fit_preprocessor, apply_preprocessor
from .dataset import Dataset, stratified_kfold
from .errors import BadHyperparameter, ShapeMismatch
from .metrics import Scores, as_percentages, score
from .models import (CandidateConfig, TrainedModel, fit_model, input_gradient,
                     tree_ensemble)
from .models.tree import Tree
from .optimize import OfflineSettings, OfflineResult, run_automl_offline

DEFAULT_ATTACK_PARAMS: dict[str, dict] = {
    "FGSM": {"eps": 0.1},
    "BIM": {"eps": 0.1, "alpha": 0.02, "iters": 10},
    "DTA": {"offset": 0.001},
}


@dataclass
class AdversarialBatch:
    """Clean rows paired with their perturbed counterparts."""

    origin_rows: np.ndarray
    adv_rows: np.ndarray
    attack: str
    attack_params: dict
    true_labels: np.ndarray
    is_adversarial: np.ndarray
    # tree attack only: whether the victim's vote actually flipped per row
    flipped: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.origin_rows = np.asarray(self.origin_rows, dtype=np.float64)
        self.adv_rows = np.asarray(self.adv_rows, dtype=np.float64)
        if self.origin_rows.shape != self.adv_rows.shape:
            raise ShapeMismatch("origin and adversarial shapes differ")
        self.true_labels = np.asarray(self.true_labels, dtype=np.int64).ravel()
        if self.true_labels.shape[0] != self.origin_rows.shape[0]:
            raise ShapeMismatch("labels length differs from rows")
        self.is_adversarial = np.asarray(self.is_adversarial, dtype=bool).ravel()

    @property
    def n_rows(self) -> int:
        return self.origin_rows.shape[0]

    def max_norm(self) -> float:
        if self.n_rows == 0:
            return 0.0
        return float(np.max(np.abs(self.adv_rows - self.origin_rows)))


def _feature_box(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return rows.min(axis=0), rows.max(axis=0)


def _as_box(box, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if box is None:
        return _feature_box(rows)
    lo, hi = box
    return (np.asarray(lo, dtype=np.float64).ravel(),
            np.asarray(hi, dtype=np.float64).ravel())


def fgsm(surrogate: TrainedModel, rows, labels, eps: float,
         box=None) -> AdversarialBatch:
    """One signed-gradient step of size eps, clipped to the feature box."""
    if eps < 0:
        raise BadHyperparameter("eps must be >= 0")
    rows = np.asarray(rows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    lo, hi = _as_box(box, rows)
    grad = input_gradient(surrogate, rows, labels)
    adv = rows + eps * np.sign(grad)
    adv = np.clip(adv, lo, hi)
    changed = np.any(adv != rows, axis=1)
    return AdversarialBatch(rows, adv, "FGSM", {"eps": float(eps)},
                            labels, changed)


def bim(surrogate: TrainedModel, rows, labels, eps: float,
        alpha: float = 0.02, iters: int = 10, box=None) -> AdversarialBatch:
    """Iterated signed-gradient steps, re-projected into the eps ball."""
    if eps < 0:
        raise BadHyperparameter("eps must be >= 0")
    if alpha <= 0:
        raise BadHyperparameter("alpha must be > 0")
    if iters < 1:
        raise BadHyperparameter("iters must be >= 1")
    rows = np.asarray(rows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    lo, hi = _as_box(box, rows)
    adv = rows
    for _ in range(int(iters)):
        grad = input_gradient(surrogate, adv, labels)
        adv = adv + alpha * np.sign(grad)
        adv = np.clip(adv, rows - eps, rows + eps)
        adv = np.clip(adv, lo, hi)
    changed = np.any(adv != rows, axis=1)
    return AdversarialBatch(rows, adv, "BIM",
                            {"eps": float(eps), "alpha": float(alpha),
                             "iters": int(iters)},
                            labels, changed)


def _leaf_value(tree: Tree, x: np.ndarray) -> float:
    node = 0
    feature = tree.feature
    while feature[node] >= 0:
        if x[feature[node]] <= tree.threshold[node]:
            node = int(tree.left[node])
        else:
            node = int(tree.right[node])
    return float(tree.value[node])


class _VoteState:
    """Tracks per-tree leaf values for one row and the ensemble's label."""

    def __init__(self, trees: list[Tree], mode: str) -> None:
        self.trees = trees
        self.mode = mode
        self.values = np.zeros(len(trees))
        self.base = 0.0

    def refresh(self, x: np.ndarray, base_score: float = 0.0) -> None:
        self.values = np.array([_leaf_value(t, x) for t in self.trees])
        self.base = base_score

    def label(self) -> int:
        if self.mode == "vote":
            return int(self.values.mean() >= 0.5)
        return int(self.base + self.values.sum() >= 0.0)

    def tree_label(self, t: int) -> int:
        if self.mode == "vote":
            return int(self.values[t] >= 0.5)
        return int(self.values[t] > 0.0)


def dta(victim: TrainedModel, rows, labels, offset: float = 0.001,
        box=None) -> AdversarialBatch:
    """Decision-path attack on a tree ensemble.

    Per row and per tree (in ensemble order): find the nearest leaf of the
    opposite class, nearest meaning fewest features whose current value
    falls outside that leaf's interval box, ties to the first leaf in
    depth-first order; each offending feature moves to exactly `offset`
    past the violated bound. Trees are edited until the ensemble's vote
    flips; rows that never flip keep the perturbations made so far and are
    flagged in `flipped`.
    """
    if offset <= 0:
        raise BadHyperparameter("offset must be > 0")
    rows = np.asarray(rows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    trees, mode = tree_ensemble(victim)
    base_score = float(getattr(victim, "base_score", 0.0))
    n_features = rows.shape[1]
    lo_box, hi_box = _as_box(box, rows)

    leaf_geom = []
    for tree in trees:
        ids, lo, hi = tree.leaf_boxes(n_features)
        vals = tree.value[ids]
        if mode == "vote":
            cls = (vals >= 0.5).astype(np.int64)
        else:
            cls = (vals > 0.0).astype(np.int64)
        leaf_geom.append((lo, hi, cls))

    clean_pred = victim.predict(rows)
    adv = rows.copy()
    flipped = np.zeros(rows.shape[0], dtype=bool)
    state = _VoteState(trees, mode)

    for i in range(rows.shape[0]):
        x = adv[i]
        target = 1 - int(clean_pred[i])
        state.refresh(x, base_score)
        for t in range(len(trees)):
            if state.label() == target:
                break
            if state.tree_label(t) == target:
                continue
            lo, hi, cls = leaf_geom[t]
            cand = np.flatnonzero(cls == target)
            if cand.size == 0:
                continue
            viol = (x[None, :] <= lo[cand]) | (x[None, :] > hi[cand])
            counts = viol.sum(axis=1)
            pick = int(np.argmin(counts))
            leaf_lo, leaf_hi = lo[cand[pick]], hi[cand[pick]]
            for j in np.flatnonzero(viol[pick]):
                if x[j] <= leaf_lo[j]:
                    x[j] = leaf_lo[j] + offset
                else:
                    x[j] = leaf_hi[j] - offset
            state.refresh(x, base_score)
        np.clip(x, lo_box, hi_box, out=x)
        state.refresh(x, base_score)
        flipped[i] = state.label() != int(clean_pred[i])

    changed = np.any(adv != rows, axis=1)
    return AdversarialBatch(rows, adv, "DTA", {"offset": float(offset)},
                            labels, changed, flipped=flipped)


def attack(name: str, *, rows, labels, params: dict | None = None,
           surrogate: TrainedModel | None = None,
           victim: TrainedModel | None = None, box=None) -> AdversarialBatch:
    """Dispatch one attack by name with defaulted parameters."""
    name = name.upper()
    if name not in DEFAULT_ATTACK_PARAMS:
        raise BadHyperparameter(f"unknown attack {name!r}")
    p = dict(DEFAULT_ATTACK_PARAMS[name])
    p.update(params or {})
    if name == "FGSM":
        return fgsm(surrogate, rows, labels, eps=p["eps"], box=box)
    if name == "BIM":
        return bim(surrogate, rows, labels, eps=p["eps"], alpha=p["alpha"],
                   iters=p["iters"], box=box)
    return dta(victim, rows, labels, offset=p["offset"], box=box)


def fit_detector(clean: Dataset, adv: AdversarialBatch,
                 config: CandidateConfig | None = None,
                 seed: int = 0) -> TrainedModel:
    """Binary model separating clean rows (0) from adversarial rows (1)."""
    if clean.n_features != adv.adv_rows.shape[1]:
        raise ShapeMismatch("clean and adversarial feature widths differ")
    X = np.vstack([clean.features, adv.adv_rows])
    y = np.concatenate([np.zeros(clean.n_rows, dtype=np.int64),
                        np.ones(adv.n_rows, dtype=np.int64)])
    cfg = config or CandidateConfig("GBDT", {})
    return fit_model(cfg, X, y, seed=seed)


def filter_adversarial(detector: TrainedModel, mixed: Dataset) -> Dataset:
    """Drop every row the detector labels adversarial; keep row order."""
    flags = detector.predict(mixed.features) == 1
    return mixed.select_rows(np.flatnonzero(~flags))


@dataclass
class ExerciseSettings:
    folds_for_split: int = 5
    detector_holdout: float = 0.2
    automl: OfflineSettings | None = None
    surrogate_params: dict = field(
        default_factory=lambda: {"learning_rate": 0.05, "hidden_units": 64})


def _metric_block(s: Scores, seconds: float) -> dict:
    block = as_percentages(s)
    block["seconds"] = float(seconds)
    return block


@dataclass
class ExerciseReport:
    attack: str
    attack_params: dict
    ids_kind: str
    ids_params: dict
    baseline_metrics: dict
    under_attack_metrics: dict
    under_attack_mixed_metrics: dict
    detector_metrics: dict
    recovered_metrics: dict
    counts: dict
    seed: int

    def as_dict(self) -> dict:
        return {
            "attack": self.attack,
            "attack_params": dict(self.attack_params),
            "ids_kind": self.ids_kind,
            "ids_params": dict(self.ids_params),
            "baseline_metrics": dict(self.baseline_metrics),
            "under_attack_metrics": dict(self.under_attack_metrics),
            "under_attack_mixed_metrics": dict(self.under_attack_mixed_metrics),
            "detector_metrics": dict(self.detector_metrics),
            "recovered_metrics": dict(self.recovered_metrics),
            "counts": dict(self.counts),
            "seed": self.seed,
        }


def _transform(result: OfflineResult, raw: Dataset) -> Dataset:
    sel = raw.select_columns(result.features.kept)
    return apply_preprocessor(result.preprocess, sel)


def run_defense_exercise(ds: Dataset, attack_name: str,
                         params: dict | None = None, seed: int = 0,
                         settings: ExerciseSettings | None = None,
                         ) -> ExerciseReport:
    """Six-stage drill: tune, attack, measure damage, detect, filter, retrain.

    Stages: (1) tune and fit the detector-of-intrusions on the training
    split and score it on the held-out test split; (2) perturb the real
    training rows; (3) score the fitted model on the perturbed rows alone
    and on the mixed pool; (4) fit the adversarial-row detector on the
    union and score it on its own holdout; (5) filter the mixed pool;
    (6) refit on the survivors and score on the untouched test split.
    """
    st = settings or ExerciseSettings()
    attack_name = attack_name.upper()
    if attack_name not in DEFAULT_ATTACK_PARAMS:
        raise BadHyperparameter(f"unknown attack {attack_name!r}")
    attack_params = dict(DEFAULT_ATTACK_PARAMS[attack_name])
    attack_params.update(params or {})

    split_seed = int(child_rng(seed, "exercise-split").integers(2 ** 31))
    plan = stratified_kfold(ds, st.folds_for_split, seed=split_seed)
    train_idx, test_idx = plan.folds[0]
    train_raw = ds.select_rows(train_idx)
    test_raw = ds.select_rows(test_idx)

    t0 = time.perf_counter()
    automl = st.automl or OfflineSettings(seed=seed)
    result = run_automl_offline(train_raw, automl)
    ids_model = result.model
    test = _transform(result, test_raw)
    baseline_scores = score(test.labels, ids_model.predict(test.features))
    baseline = _metric_block(baseline_scores, time.perf_counter() - t0)

    # the exact pool the model trained on: originals first, synthetic after
    t1 = time.perf_counter()
    train_sel = train_raw.select_columns(result.features.kept)
    _, train_pool = fit_preprocessor(
        train_sel, outlier_threshold=automl.outlier_threshold,
        balance=automl.balance, adasyn_k=automl.adasyn_k,
        adasyn_beta=automl.adasyn_beta, seed=automl.seed)
    box = _feature_box(train_pool.features)
    n_real = train_raw.n_rows
    origin_rows = train_pool.features[:n_real]
    origin_labels = train_pool.labels[:n_real]

    surrogate = None
    if attack_name in ("FGSM", "BIM"):
        surrogate = fit_model(CandidateConfig("MLP", dict(st.surrogate_params)),
                              train_pool.features, train_pool.labels,
                              seed=int(child_rng(seed, "surrogate").integers(2 ** 31)))
    batch = attack(attack_name, rows=origin_rows, labels=origin_labels,
                   params=attack_params, surrogate=surrogate, victim=ids_model,
                   box=box)

    adv_scores = score(batch.true_labels, ids_model.predict(batch.adv_rows))
    mixed_X = np.vstack([train_pool.features, batch.adv_rows])
    mixed_y = np.concatenate([train_pool.labels, batch.true_labels])
    mixed = Dataset(mixed_X, mixed_y,
                    list(train_pool.feature_names),
                    list(train_pool.column_kinds), None)
    mixed_scores = score(mixed.labels, ids_model.predict(mixed.features))
    attack_seconds = time.perf_counter() - t1
    under_attack = _metric_block(adv_scores, attack_seconds)
    under_attack_mixed = _metric_block(mixed_scores, attack_seconds)

    # detector operates on clean-vs-adversarial labels; holdout is stratified
    t2 = time.perf_counter()
    det_labels = np.concatenate([np.zeros(train_pool.n_rows, dtype=np.int64),
                                 np.ones(batch.n_rows, dtype=np.int64)])
    det_ds = Dataset(mixed_X, det_labels, list(train_pool.feature_names),
                     list(train_pool.column_kinds), None)
    det_folds = max(2, int(round(1.0 / st.detector_holdout)))
    det_seed = int(child_rng(seed, "detector-split").integers(2 ** 31))
    det_plan = stratified_kfold(det_ds, det_folds, seed=det_seed)
    fit_idx, hold_idx = det_plan.folds[0]
    det_cfg = (CandidateConfig("GBDT", dict(result.best_params))
               if result.winner_kind == "GBDT" else CandidateConfig("GBDT", {}))
    det_fit = det_ds.select_rows(fit_idx)
    det_hold = det_ds.select_rows(hold_idx)
    detector = fit_model(det_cfg, det_fit.features, det_fit.labels,
                         seed=int(child_rng(seed, "detector").integers(2 ** 31)))
    det_scores = score(det_hold.labels, detector.predict(det_hold.features))
    detector_block = _metric_block(det_scores, time.perf_counter() - t2)

    t3 = time.perf_counter()
    det_flags = detector.predict(mixed.features) == 1
    sanitized = filter_adversarial(detector, mixed)
    retrained = fit_model(CandidateConfig(result.winner_kind,
                                          dict(result.best_params)),
                          sanitized.features, sanitized.labels,
                          seed=automl.seed)
    recovered_scores = score(test.labels, retrained.predict(test.features))
    recovered = _metric_block(recovered_scores, time.perf_counter() - t3)

    counts = {
        "injected": int(batch.n_rows),
        "detected": int(det_flags.sum()),
        "filtered": int(mixed.n_rows - sanitized.n_rows),
        "train_rows": int(train_pool.n_rows),
        "test_rows": int(test.n_rows),
        "sanitized_rows": int(sanitized.n_rows),
    }
    return ExerciseReport(attack=attack_name, attack_params=attack_params,
                          ids_kind=result.winner_kind,
                          ids_params=dict(result.best_params),
                          baseline_metrics=baseline,
                          under_attack_metrics=under_attack,
                          under_attack_mixed_metrics=under_attack_mixed,
                          detector_metrics=detector_block,
                          recovered_metrics=recovered,
                          counts=counts, seed=int(seed))
