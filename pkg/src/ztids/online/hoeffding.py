"""Incremental decision tree with Hoeffding-bounded splits.

Leaves keep per-class Gaussian summaries (weighted count, mean, M2, min,
max) per feature. Every grace_period arrivals a leaf evaluates candidate
thresholds (10 evenly spaced points over the observed range, class masses
estimated by the Gaussian CDF) and splits when the best feature's
information gain beats the runner-up by the Hoeffding bound
eps = sqrt(ln(1/delta) / (2 n)) or when eps falls under the tie threshold.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ShapeMismatch

_ERF_P = 0.3275911
_ERF_A = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)


def hoeffding_bound(delta: float, weight: float) -> float:
    """eps = sqrt(ln(1/delta) / (2 n)) for range-1 observables."""
    return math.sqrt(math.log(1.0 / delta) / (2.0 * weight))


def _norm_cdf(z: np.ndarray) -> np.ndarray:
    """Standard normal CDF via the Abramowitz-Stegun erf polynomial."""
    x = np.asarray(z, dtype=np.float64) / math.sqrt(2.0)
    sign = np.sign(x)
    ax = np.abs(x)
    t = 1.0 / (1.0 + _ERF_P * ax)
    poly = t * (_ERF_A[0] + t * (_ERF_A[1] + t * (_ERF_A[2] + t * (_ERF_A[3] + t * _ERF_A[4]))))
    erf = sign * (1.0 - poly * np.exp(-ax * ax))
    return 0.5 * (1.0 + erf)


def _entropy(w: np.ndarray) -> np.ndarray:
    """Binary entropy in bits of count vectors [..., 2]; zero rows give 0."""
    tot = w.sum(axis=-1)
    safe = np.where(tot > 0, tot, 1.0)
    p = w / safe[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=-1)


class _Leaf:
    __slots__ = ("class_w", "obs_w", "mean", "m2", "vmin", "vmax", "since_attempt")

    def __init__(self, n_features: int, class_w=None) -> None:
        # class_w may start with priors inherited from the parent's split
        # estimate; obs_w and the moments cover only rows this leaf saw
        self.class_w = np.zeros(2) if class_w is None else np.asarray(class_w, dtype=np.float64)
        self.obs_w = np.zeros(2)
        self.mean = np.zeros((2, n_features))
        self.m2 = np.zeros((2, n_features))
        self.vmin = np.full((2, n_features), np.inf)
        self.vmax = np.full((2, n_features), -np.inf)
        self.since_attempt = 0.0

    def add(self, x: np.ndarray, y: int, weight: float) -> None:
        new = self.obs_w[y] + weight
        delta = x - self.mean[y]
        self.mean[y] += (weight / new) * delta
        self.m2[y] += weight * delta * (x - self.mean[y])
        self.obs_w[y] = new
        self.class_w[y] += weight
        np.minimum(self.vmin[y], x, out=self.vmin[y])
        np.maximum(self.vmax[y], x, out=self.vmax[y])
        self.since_attempt += weight


class _Split:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature: int, threshold: float) -> None:
        self.feature = feature
        self.threshold = threshold
        self.left = None
        self.right = None


class HoeffdingTree:
    def __init__(self, n_features: int, grace_period: int = 200,
                 delta: float = 1e-7, tie_threshold: float = 0.05,
                 n_split_points: int = 10) -> None:
        self.n_features = int(n_features)
        self.grace_period = int(grace_period)
        self.delta = float(delta)
        self.tie_threshold = float(tie_threshold)
        self.n_split_points = int(n_split_points)
        self.root = _Leaf(self.n_features)
        self.n_seen = 0
        self.split_records: list[tuple[float, float, float, float]] = []
        self.drift_events: list[int] = []  # always empty: no detector inside

    @property
    def n_nodes(self) -> int:
        def count(node) -> int:
            if isinstance(node, _Leaf):
                return 1
            return 1 + count(node.left) + count(node.right)
        return count(self.root)

    def _route(self, x: np.ndarray):
        node = self.root
        parent, side = None, None
        while isinstance(node, _Split):
            parent = node
            if x[node.feature] <= node.threshold:
                node, side = node.left, "left"
            else:
                node, side = node.right, "right"
        return node, parent, side

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n_features:
            raise ShapeMismatch(
                f"expected {self.n_features} features, got {x.shape[0]}")
        return x

    def predict_one(self, x) -> int:
        leaf, _, _ = self._route(self._check(x))
        return int(np.argmax(leaf.class_w))

    def predict_proba_one(self, x) -> float:
        leaf, _, _ = self._route(self._check(x))
        tot = leaf.class_w.sum()
        return float(leaf.class_w[1] / tot) if tot > 0 else 0.0

    def learn_one(self, x, y: int, weight: float = 1.0, pred=None) -> None:
        x = self._check(x)
        self.n_seen += 1
        leaf, parent, side = self._route(x)
        leaf.add(x, int(y), float(weight))
        if leaf.since_attempt >= self.grace_period:
            leaf.since_attempt = 0.0
            self._attempt_split(leaf, parent, side)

    def _attempt_split(self, leaf: _Leaf, parent, side) -> None:
        w = leaf.obs_w
        if w[0] == 0 or w[1] == 0:
            return
        lo = np.min(leaf.vmin, axis=0)
        hi = np.max(leaf.vmax, axis=0)
        usable = hi > lo
        if not usable.any():
            return
        W = float(w.sum())
        h0 = float(_entropy(w))
        k = self.n_split_points
        steps = np.arange(1, k + 1) / (k + 1)
        thr = lo[None, :] + steps[:, None] * (hi - lo)[None, :]  # (k, M)

        left = np.zeros((2, k, self.n_features))
        for c in (0, 1):
            var = leaf.m2[c] / max(w[c], 1e-12)
            sd = np.sqrt(np.maximum(var, 0.0))
            mu = leaf.mean[c]
            frac = np.where(sd[None, :] > 0,
                            _norm_cdf((thr - mu[None, :]) / np.where(sd[None, :] > 0, sd[None, :], 1.0)),
                            (thr >= mu[None, :]).astype(np.float64))
            left[c] = w[c] * frac
        right = w[:, None, None] - left
        wl = left.sum(axis=0)
        wr = right.sum(axis=0)
        h_after = (wl * _entropy(np.stack([left[0], left[1]], axis=-1))
                   + wr * _entropy(np.stack([right[0], right[1]], axis=-1))) / W
        gain = h0 - h_after                      # (k, M)
        gain[:, ~usable] = -np.inf
        # degenerate cuts that put (almost) everything on one side carry no
        # information; mask them so a split always partitions the estimate
        frac_l = wl / W
        gain[(frac_l < 1e-3) | (frac_l > 1 - 1e-3)] = -np.inf

        best_per_feature = gain.max(axis=0)      # (M,)
        order = np.argsort(-best_per_feature, kind="stable")
        g1 = float(best_per_feature[order[0]])
        g2 = float(best_per_feature[order[1]]) if self.n_features > 1 else 0.0
        if not math.isfinite(g1) or g1 <= 0:
            return
        if not math.isfinite(g2):
            g2 = 0.0
        eps = hoeffding_bound(self.delta, W)
        if not (g1 - g2 > eps or eps < self.tie_threshold):
            return

        feat = int(order[0])
        ti = int(np.argmax(gain[:, feat]))
        threshold = float(thr[ti, feat])
        self.split_records.append((g1, g2, eps, W))
        split = _Split(feat, threshold)
        # children inherit the parent's prediction counts split by the
        # estimated per-class left fractions
        frac_left = left[:, ti, feat] / w
        split.left = _Leaf(self.n_features, class_w=leaf.class_w * frac_left)
        split.right = _Leaf(self.n_features, class_w=leaf.class_w * (1.0 - frac_left))
        if parent is None:
            self.root = split
        elif side == "left":
            parent.left = split
        else:
            parent.right = split
