"""Streaming ensembles: adaptive random forest and random patches.

Both run online bagging (per-member Poisson(6) example weights) over
Hoeffding trees, each member seeing its own fixed feature subset and guarded
by its own drift detector on the member's error stream. DDM members grow a
background tree during warnings and swap it in on drift; Adwin members (no
warning state) reset outright on drift. The ensemble vote is an unweighted
majority, predicting attack on ties.
"""
from __future__ import annotations

import math

import numpy as np

from .._rand import child_rng
from ..errors import ShapeMismatch
from .drift import Adwin, Ddm
from .hoeffding import HoeffdingTree

POISSON_RATE = 6.0


class _Member:
    __slots__ = ("tree", "subset", "detector", "background", "bg_subset")

    def __init__(self, tree: HoeffdingTree, subset: np.ndarray, detector) -> None:
        self.tree = tree
        self.subset = subset
        self.detector = detector
        self.background: HoeffdingTree | None = None
        self.bg_subset: np.ndarray | None = None


class _SubspaceEnsemble:
    """Shared machinery; subclasses fix the feature-subset size."""

    name = "ensemble"

    def __init__(self, n_features: int, n_models: int = 5,
                 drift_detector: str = "ADWIN", grace_period: int = 200,
                 subset_size: int | None = None, seed: int = 0,
                 adwin_check_interval: int = 4) -> None:
        if drift_detector not in ("ADWIN", "DDM"):
            raise ValueError(f"unknown drift detector {drift_detector!r}")
        self.n_features = int(n_features)
        self.n_models = int(n_models)
        self.drift_detector = drift_detector
        self.grace_period = int(grace_period)
        self.subset_size = int(subset_size if subset_size is not None
                               else self._default_subset_size(n_features))
        self.subset_size = min(max(self.subset_size, 1), self.n_features)
        self._adwin_check = int(adwin_check_interval)
        self.rng = child_rng(seed, self.name)
        self.members = [self._fresh_member() for _ in range(self.n_models)]
        self.n_seen = 0
        self.drift_events: list[int] = []
        self.warning_events: list[int] = []

    @staticmethod
    def _default_subset_size(n_features: int) -> int:
        raise NotImplementedError

    def _fresh_detector(self):
        if self.drift_detector == "DDM":
            return Ddm()
        return Adwin(check_interval=self._adwin_check)

    def _fresh_subset(self) -> np.ndarray:
        return np.sort(self.rng.choice(self.n_features, size=self.subset_size,
                                       replace=False))

    def _fresh_tree(self) -> HoeffdingTree:
        return HoeffdingTree(self.subset_size, grace_period=self.grace_period)

    def _fresh_member(self) -> _Member:
        return _Member(self._fresh_tree(), self._fresh_subset(),
                       self._fresh_detector())

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n_features:
            raise ShapeMismatch(
                f"expected {self.n_features} features, got {x.shape[0]}")
        return x

    def predict_one(self, x) -> int:
        x = self._check(x)
        votes = sum(m.tree.predict_one(x[m.subset]) for m in self.members)
        return int(votes / self.n_models >= 0.5)

    def learn_one(self, x, y: int, pred=None) -> None:
        x = self._check(x)
        y = int(y)
        self.n_seen += 1
        for member in self.members:
            member_pred = member.tree.predict_one(x[member.subset])
            sig = member.detector.update(int(member_pred != y))
            w = float(self.rng.poisson(POISSON_RATE))
            if w > 0:
                member.tree.learn_one(x[member.subset], y, weight=w)
                if member.background is not None:
                    member.background.learn_one(x[member.bg_subset], y, weight=w)
            if sig.is_warning and member.background is None:
                member.bg_subset = self._fresh_subset()
                member.background = self._fresh_tree()
                self.warning_events.append(self.n_seen)
            elif sig.is_drift:
                # Adwin cuts are two-sided; a cut caused by the error rate
                # improving (tree just learned something) must not wipe the
                # member, only a worsening one signals real drift
                if isinstance(member.detector, Adwin) and not member.detector.cut_worse:
                    continue
                if member.background is not None:
                    member.tree = member.background
                    member.subset = member.bg_subset
                else:
                    member.subset = self._fresh_subset()
                    member.tree = self._fresh_tree()
                member.background = None
                member.bg_subset = None
                member.detector = self._fresh_detector()
                self.drift_events.append(self.n_seen)


class AdaptiveRandomForest(_SubspaceEnsemble):
    name = "arf"

    @staticmethod
    def _default_subset_size(n_features: int) -> int:
        return int(math.ceil(math.sqrt(n_features)))


class StreamingRandomPatches(_SubspaceEnsemble):
    name = "srp"
    PATCH_FRACTION = 0.6

    def __init__(self, n_features: int, n_models: int = 5,
                 drift_detector: str = "ADWIN", grace_period: int = 200,
                 patch_fraction: float | None = None, seed: int = 0,
                 adwin_check_interval: int = 4) -> None:
        frac = self.PATCH_FRACTION if patch_fraction is None else float(patch_fraction)
        subset = int(math.ceil(frac * n_features))
        super().__init__(n_features, n_models=n_models,
                         drift_detector=drift_detector, grace_period=grace_period,
                         subset_size=subset, seed=seed,
                         adwin_check_interval=adwin_check_interval)

    @staticmethod
    def _default_subset_size(n_features: int) -> int:
        return int(math.ceil(StreamingRandomPatches.PATCH_FRACTION * n_features))
