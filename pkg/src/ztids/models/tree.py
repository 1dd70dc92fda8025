"""Flat-array decision trees with exact greedy splits.

One engine serves both ensembles: depth-first classification trees (gini or
entropy, optional per-split feature subsets, bootstrap weights) and leaf-wise
regression trees on gradient/hessian sums. Split rule is always x <= threshold
goes left; thresholds are midpoints between adjacent distinct values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Tree:
    feature: np.ndarray    # int32, -1 marks a leaf
    threshold: np.ndarray  # float64
    left: np.ndarray       # int32
    right: np.ndarray      # int32
    value: np.ndarray      # float64, defined at leaves

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row."""
        n = X.shape[0]
        idx = np.zeros(n, dtype=np.int32)
        while True:
            feat = self.feature[idx]
            active = feat >= 0
            if not active.any():
                return idx
            rows = np.flatnonzero(active)
            go_left = X[rows, feat[rows]] <= self.threshold[idx[rows]]
            idx[rows] = np.where(go_left, self.left[idx[rows]], self.right[idx[rows]])

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def decision_path(self, x: np.ndarray) -> list[int]:
        """Node indices from root to the reached leaf."""
        path = [0]
        node = 0
        while self.feature[node] >= 0:
            if x[self.feature[node]] <= self.threshold[node]:
                node = int(self.left[node])
            else:
                node = int(self.right[node])
            path.append(node)
        return path

    def leaf_boxes(self, n_features: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-leaf feature intervals (lo exclusive, hi inclusive).

        A row lands in leaf L iff lo[L, j] < x[j] <= hi[L, j] for all j.
        Returns (leaf_node_ids, lo, hi) in depth-first (left first) order.
        """
        leaves, los, his = [], [], []
        lo0 = np.full(n_features, -np.inf)
        hi0 = np.full(n_features, np.inf)
        stack = [(0, lo0, hi0)]
        while stack:
            node, lo, hi = stack.pop()
            f = int(self.feature[node])
            if f < 0:
                leaves.append(node)
                los.append(lo)
                his.append(hi)
                continue
            thr = float(self.threshold[node])
            lo_l, hi_l = lo.copy(), hi.copy()
            hi_l[f] = min(hi_l[f], thr)
            lo_r, hi_r = lo.copy(), hi.copy()
            lo_r[f] = max(lo_r[f], thr)
            # right pushed first so left pops first (depth-first, left first)
            stack.append((int(self.right[node]), lo_r, hi_r))
            stack.append((int(self.left[node]), lo_l, hi_l))
        return (np.array(leaves, dtype=np.int32),
                np.array(los), np.array(his))

    def as_dict(self) -> dict:
        return {"feature": self.feature.tolist(),
                "threshold": self.threshold.tolist(),
                "left": self.left.tolist(),
                "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(feature=np.array(d["feature"], dtype=np.int32),
                   threshold=np.array(d["threshold"], dtype=np.float64),
                   left=np.array(d["left"], dtype=np.int32),
                   right=np.array(d["right"], dtype=np.int32),
                   value=np.array(d["value"], dtype=np.float64))


class _Builder:
    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add(self, feature: int = -1, threshold: float = 0.0, value: float = 0.0) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def done(self) -> Tree:
        return Tree(feature=np.array(self.feature, dtype=np.int32),
                    threshold=np.array(self.threshold, dtype=np.float64),
                    left=np.array(self.left, dtype=np.int32),
                    right=np.array(self.right, dtype=np.int32),
                    value=np.array(self.value, dtype=np.float64))


def _impurity(w0, w1, criterion: str):
    tot = w0 + w1
    tot = np.where(tot > 0, tot, 1.0)
    p0 = w0 / tot
    p1 = w1 / tot
    if criterion == "gini":
        return 1.0 - p0 * p0 - p1 * p1
    with np.errstate(divide="ignore", invalid="ignore"):
        e0 = np.where(p0 > 0, -p0 * np.log2(p0), 0.0)
        e1 = np.where(p1 > 0, -p1 * np.log2(p1), 0.0)
    return e0 + e1


def _best_split_cls(X, y, w, feats, criterion: str, min_leaf: float):
    """Max impurity-decrease split over the given features.

    Returns (gain, feature, threshold); gain is the weighted decrease
    W_node * (imp_parent - (W_L imp_L + W_R imp_R) / W_node).
    """
    W = float(w.sum())
    W1 = float((w * y).sum())
    W0 = W - W1
    parent = float(_impurity(np.array(W0), np.array(W1), criterion))
    best_gain, best_feat, best_thr = 0.0, -1, 0.0
    n = X.shape[0]
    for j in feats:
        xs_all = X[:, j]
        order = np.argsort(xs_all, kind="stable")
        xs = xs_all[order]
        cw = np.cumsum(w[order])[:-1]
        cw1 = np.cumsum((w * y)[order])[:-1]
        valid = (xs[1:] != xs[:-1]) & (cw >= min_leaf) & ((W - cw) >= min_leaf)
        if not valid.any():
            continue
        lw0 = cw - cw1
        rw1 = W1 - cw1
        rw0 = W0 - lw0
        child = (cw * _impurity(lw0, cw1, criterion)
                 + (W - cw) * _impurity(rw0, rw1, criterion)) / W
        gain = W * (parent - child)
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))
        if gain[i] > best_gain + 1e-12:
            best_gain = float(gain[i])
            best_feat = int(j)
            best_thr = float((xs[i] + xs[i + 1]) / 2.0)
    return best_gain, best_feat, best_thr


def grow_classification_tree(X, y, w, criterion: str = "gini", max_depth: int = 30,
                             min_samples_split: float = 2, min_samples_leaf: float = 1,
                             max_features: int | None = None,
                             rng: np.random.Generator | None = None,
                             ) -> tuple[Tree, np.ndarray]:
    """Depth-first binary classification tree on rows with positive weight.

    max_features draws a fresh feature subset at every split (requires rng).
    Returns the tree plus per-feature accumulated impurity-decrease scores.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    m = X.shape[1]
    importance = np.zeros(m)
    b = _Builder()

    def majority(rows) -> float:
        w1 = float((w[rows] * y[rows]).sum())
        w0 = float(w[rows].sum()) - w1
        return 1.0 if w1 > w0 else 0.0

    def build(rows: np.ndarray, depth: int) -> int:
        W = float(w[rows].sum())
        W1 = float((w[rows] * y[rows]).sum())
        pure = W1 == 0.0 or W1 == W
        if depth >= max_depth or W < min_samples_split or pure:
            return b.add(value=majority(rows))
        if max_features is not None and max_features < m:
            feats = np.sort(rng.choice(m, size=max_features, replace=False))
        else:
            feats = np.arange(m)
        gain, feat, thr = _best_split_cls(X[rows], y[rows], w[rows], feats,
                                          criterion, min_samples_leaf)
        if feat < 0:
            return b.add(value=majority(rows))
        importance[feat] += gain
        node = b.add(feature=feat, threshold=thr)
        go_left = X[rows, feat] <= thr
        left_id = build(rows[go_left], depth + 1)
        right_id = build(rows[~go_left], depth + 1)
        b.left[node] = left_id
        b.right[node] = right_id
        return node

    rows0 = np.flatnonzero(w > 0)
    build(rows0, 0)
    return b.done(), importance


def grow_regression_tree(X, g, h, max_leaves: int = 31, max_depth: int = 30,
                         min_child: int = 1, lam: float = 1e-3,
                         leaf_clip: float = 10.0) -> Tree:
    """Leaf-wise tree minimizing the second-order boosting objective.

    Leaf value is -G/(H + lam), clipped to +-leaf_clip. The leaf with the
    largest split gain is expanded first until max_leaves is reached or no
    split improves the objective.
    """
    X = np.asarray(X, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64).ravel()
    h = np.asarray(h, dtype=np.float64).ravel()

    def leaf_value(rows) -> float:
        v = -g[rows].sum() / (h[rows].sum() + lam)
        return float(np.clip(v, -leaf_clip, leaf_clip))

    def best_split(rows):
        n = rows.size
        if n < 2 * min_child:
            return 0.0, -1, 0.0, None, None
        G = g[rows].sum()
        H = h[rows].sum()
        base = G * G / (H + lam)
        best = (0.0, -1, 0.0, None, None)
        for j in range(X.shape[1]):
            xs_all = X[rows, j]
            order = np.argsort(xs_all, kind="stable")
            xs = xs_all[order]
            gl = np.cumsum(g[rows][order])[:-1]
            hl = np.cumsum(h[rows][order])[:-1]
            cnt = np.arange(1, n)
            valid = (xs[1:] != xs[:-1]) & (cnt >= min_child) & ((n - cnt) >= min_child)
            if not valid.any():
                continue
            gr = G - gl
            hr = H - hl
            gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - base
            gain[~valid] = -np.inf
            i = int(np.argmax(gain))
            if gain[i] > best[0] + 1e-12:
                thr = float((xs[i] + xs[i + 1]) / 2.0)
                go_left = xs_all <= thr
                best = (float(gain[i]), j, thr, rows[go_left], rows[~go_left])
        return best

    b = _Builder()
    all_rows = np.arange(X.shape[0])
    root = b.add(value=leaf_value(all_rows))
    # frontier entries: (gain, node_id, depth, feature, threshold, left_rows, right_rows)
    frontier = []
    gain, feat, thr, lr, rr = best_split(all_rows)
    if feat >= 0:
        frontier.append((gain, root, 0, feat, thr, lr, rr))
    n_leaves = 1
    while frontier and n_leaves < max_leaves:
        k = max(range(len(frontier)), key=lambda i: (frontier[i][0], -frontier[i][1]))
        gain, node, depth, feat, thr, lr, rr = frontier.pop(k)
        b.feature[node] = feat
        b.threshold[node] = thr
        left_id = b.add(value=leaf_value(lr))
        right_id = b.add(value=leaf_value(rr))
        b.left[node] = left_id
        b.right[node] = right_id
        n_leaves += 1
        if depth + 1 < max_depth:
            for child_id, child_rows in ((left_id, lr), (right_id, rr)):
                cgain, cfeat, cthr, clr, crr = best_split(child_rows)
                if cfeat >= 0:
                    frontier.append((cgain, child_id, depth + 1, cfeat, cthr, clr, crr))
    return b.done()
