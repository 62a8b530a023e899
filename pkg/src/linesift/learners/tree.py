"""CART decision trees and the random forest built from them.

Splits minimize weighted Gini impurity. For binary labels that reduces to
minimizing

    (posL*negL*nR + posR*negR*nL) / (nL*nR)

(the constant 2/n dropped). Numerator and denominator are exact integers small
enough that the float64 quotient is computed exactly, so split selection is
reproducible and an independently written reference tree reaches identical
decisions. With every feature in play (plain CART) ties prefer the lowest
feature index, then the lowest threshold; with a sampled feature subset, ties
follow the sampling order so that equal-quality splits do not correlate the
forest's trees.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateModelError
from .dataset import Dataset


class CartTree:
    """Array-encoded decision tree; feature == -1 marks a leaf."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)

    def predict_scores(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        node = np.zeros(len(x), dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            go_left = x[idx, feat[idx]] <= self.threshold[node[idx]]
            node[idx] = np.where(go_left, self.left[node[idx]], self.right[node[idx]])
        return self.value[node]

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "CartTree":
        return cls(payload["feature"], payload["threshold"], payload["left"],
                   payload["right"], payload["value"])


def _best_split(x, y, feat_indices, min_leaf):
    """(quality, feature, threshold) of the best valid split or None.

    Ties go to the earliest feature in `feat_indices` (then lowest threshold),
    so the caller controls tie-breaking through the iteration order.
    """
    n = len(y)
    total_pos = int(y.sum())
    best = None
    for j in feat_indices:
        col = x[:, j]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        cum_pos = np.cumsum(y[order])
        boundary = np.nonzero(xs[:-1] < xs[1:])[0]  # split after position i
        if boundary.size == 0:
            continue
        n_left = boundary + 1
        n_right = n - n_left
        if min_leaf > 1:
            ok = (n_left >= min_leaf) & (n_right >= min_leaf)
            boundary, n_left, n_right = boundary[ok], n_left[ok], n_right[ok]
            if boundary.size == 0:
                continue
        pos_left = cum_pos[boundary]
        neg_left = n_left - pos_left
        pos_right = total_pos - pos_left
        neg_right = n_right - pos_right
        quality = ((pos_left * neg_left * n_right + pos_right * neg_right * n_left)
                   / (n_left * n_right))
        k = int(np.argmin(quality))  # first minimum: lowest threshold wins ties
        q = float(quality[k])
        if best is None or q < best[0]:
            thr = (xs[boundary[k]] + xs[boundary[k] + 1]) / 2.0
            best = (q, int(j), float(thr))
    return best


def _build_tree(x, y, rng, max_depth, min_leaf, mtry):
    n_features = x.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    def grow(indices, depth):
        node = new_node()
        ys = y[indices]
        pos = int(ys.sum())
        value[node] = pos / len(ys)
        if pos == 0 or pos == len(ys) or depth >= max_depth or len(ys) < 2 * min_leaf:
            return node
        if mtry >= n_features:
            # canonical ascending order: single-tree mode matches plain CART
            feats = np.arange(n_features)
        else:
            # keep the sampling order: random tie-breaking decorrelates trees
            feats = rng.choice(n_features, size=mtry, replace=False)
        best = _best_split(x[indices], ys, feats, min_leaf)
        if best is None:
            return node
        _, j, thr = best
        go_left = x[indices, j] <= thr
        feature[node] = j
        threshold[node] = thr
        left[node] = grow(indices[go_left], depth + 1)
        right[node] = grow(indices[~go_left], depth + 1)
        return node

    grow(np.arange(len(y)), 0)
    return CartTree(feature, threshold, left, right, value)


def train_cart(data: Dataset, max_depth=12, min_leaf=1, seed=0) -> CartTree:
    """Single tree on the full data with every feature considered at each split."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return _build_tree(data.vectors, data.labels, rng, max_depth, min_leaf,
                       mtry=data.n_features)


class RandomForestModel:
    kind = "random_forest"

    def __init__(self, trees, n_trees, max_depth, min_leaf, mtry, bootstrap, seed):
        self.trees = trees
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.mtry = mtry
        self.bootstrap = bootstrap
        self.seed = seed

    def predict_scores(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros(len(x))
        for tree in self.trees:
            total += tree.predict_scores(x)
        return total / len(self.trees)

    def to_payload(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "mtry": self.mtry,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "trees": [t.to_payload() for t in self.trees],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "RandomForestModel":
        trees = [CartTree.from_payload(p) for p in payload["trees"]]
        return cls(trees, payload["n_trees"], payload["max_depth"], payload["min_leaf"],
                   payload["mtry"], payload["bootstrap"], payload["seed"])


def train_random_forest(data: Dataset, n_trees=100, max_depth=12, min_leaf=1,
                        mtry=6, bootstrap=True, seed=0) -> RandomForestModel:
    """Gini-grown forest; deterministic for a given seed."""
    if len(data) < 2:
        raise DegenerateModelError("need at least 2 training rows")
    if len(np.unique(data.labels)) < 2:
        raise DegenerateModelError("training data has a single class")
    trees = []
    seeds = np.random.SeedSequence(seed).spawn(n_trees)
    for tree_seed in seeds:
        rng = np.random.Generator(np.random.PCG64(tree_seed))
        if bootstrap:
            idx = rng.integers(0, len(data), size=len(data))
            x, y = data.vectors[idx], data.labels[idx]
        else:
            x, y = data.vectors, data.labels
        trees.append(_build_tree(x, y, rng, max_depth, min_leaf, mtry))
    return RandomForestModel(trees, n_trees, max_depth, min_leaf, mtry, bootstrap, seed)
