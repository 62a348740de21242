"""Random forest classifier built from scratch on numpy.

CART trees with Gini impurity, bootstrap bagging, per-split random feature
subsets, and majority voting.  The protocol is frozen so that any two
implementations of this module agree on defaults: 100 trees, unlimited
depth, floor(sqrt(D)) features per split, min_samples_leaf 1, bootstrap on.
Exact tree structures still depend on this module's RNG stream, which is why
downstream accuracy checks use tolerance bands rather than exact values.

Split search at a node is vectorized: one stable argsort per candidate
feature, class counts accumulated by prefix sums, Gini evaluated at every
midpoint between distinct neighboring values.  If the sampled feature subset
admits no valid split, further features are inspected in the same random
permutation before giving up, so ties and constant columns do not produce
premature leaves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ForestError(ValueError):
    """Invalid training data or configuration."""


@dataclass(frozen=True)
class ForestConfig:
    num_trees: int = 100
    max_depth: int | None = None
    features_per_split: int | None = None  # None: floor(sqrt(D))
    min_samples_leaf: int = 1
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ForestError("num_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ForestError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ForestError("min_samples_leaf must be >= 1")

    def resolved_features_per_split(self, d: int) -> int:
        k = self.features_per_split
        if k is None:
            k = max(1, int(np.sqrt(d)))
        if not (1 <= k <= d):
            raise ForestError(f"features_per_split {k} outside [1, {d}]")
        return k


class _Tree:
    """Flat-array CART tree; feature -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[int] = []

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0)
        return len(self.feature) - 1

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0], dtype=np.int64)
        stack = [(0, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.value[node]
                continue
            goes_left = x[idx, f] <= self.threshold[node]
            stack.append((self.left[node], idx[goes_left]))
            stack.append((self.right[node], idx[~goes_left]))
        return out


def _gini_from_counts(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    # counts: (m, c) class counts, totals: (m,) row sums (> 0)
    frac = counts / totals[:, None]
    return 1.0 - np.sum(frac * frac, axis=1)


def _majority(y: np.ndarray, c: int) -> int:
    return int(np.argmax(np.bincount(y, minlength=c)))


def _best_split_on_feature(xcol, y_onehot, min_leaf):
    """Best Gini split of one feature column; None if no valid position."""
    s = xcol.shape[0]
    order = np.argsort(xcol, kind="stable")
    xs = xcol[order]
    counts = np.cumsum(y_onehot[order], axis=0)  # counts[t-1] = left side of size t
    total = counts[-1]
    sizes_left = np.arange(1, s)
    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        valid &= (sizes_left >= min_leaf) & (s - sizes_left >= min_leaf)
    if not np.any(valid):
        return None
    left = counts[:-1]
    right = total[None, :] - left
    sizes_right = s - sizes_left
    g_left = _gini_from_counts(left, sizes_left)
    g_right = _gini_from_counts(right, sizes_right)
    weighted = (sizes_left * g_left + sizes_right * g_right) / s
    weighted[~valid] = np.inf
    t = int(np.argmin(weighted))
    threshold = 0.5 * (xs[t] + xs[t + 1])
    # adjacent floats can round the midpoint up onto xs[t+1], which would
    # send every sample left; fall back to the left value itself
    if threshold >= xs[t + 1]:
        threshold = xs[t]
    return float(weighted[t]), threshold


class RandomForest:
    """Bagged CART ensemble with majority voting and impurity importances."""

    def __init__(self, config: ForestConfig | None = None):
        self.config = config or ForestConfig()
        self.trees_: list[_Tree] = []
        self.bootstrap_indices_: list[np.ndarray] = []
        self.num_classes_ = 0
        self.num_features_ = 0
        self._importance_accum: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray, num_classes: int | None = None):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if x.ndim != 2:
            raise ForestError(f"X must be 2-d, got shape {x.shape}")
        if x.shape[0] != y.shape[0]:
            raise ForestError(f"{x.shape[0]} rows but {y.shape[0]} labels")
        if x.shape[0] == 0:
            raise ForestError("empty training data")
        if x.shape[0] == 1:
            raise ForestError("cannot train on a single sample")
        if not np.all(np.isfinite(x)):
            raise ForestError("non-finite feature values are a hard error")
        if y.min() < 0:
            raise ForestError("negative class labels")
        c = int(y.max()) + 1 if num_classes is None else int(num_classes)
        if y.max() >= c:
            raise ForestError(f"label {int(y.max())} outside [0, {c})")
        n, d = x.shape
        cfg = self.config
        k = cfg.resolved_features_per_split(d)
        self.num_classes_ = c
        self.num_features_ = d
        self.trees_ = []
        self.bootstrap_indices_ = []
        importances = np.zeros(d)
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.num_trees)]
        for rng in streams:
            if cfg.bootstrap:
                idx = rng.integers(0, n, size=n)
            else:
                idx = np.arange(n)
            self.bootstrap_indices_.append(idx)
            tree, tree_importance = self._grow_tree(x[idx], y[idx], c, k, rng)
            self.trees_.append(tree)
            total = tree_importance.sum()
            if total > 0:
                importances += tree_importance / total
        self._importance_accum = importances
        return self

    def _grow_tree(self, x, y, c, k, rng):
        cfg = self.config
        tree = _Tree()
        importance = np.zeros(x.shape[1])
        y_onehot = np.zeros((x.shape[0], c))
        y_onehot[np.arange(x.shape[0]), y] = 1.0

        # iterative depth-first growth in left-before-right order, matching
        # what the recursive formulation would produce node for node
        root = tree.add_node()
        stack = [(root, np.arange(x.shape[0]), 0)]
        while stack:
            node, idx, depth = stack.pop()
            ys = y[idx]
            tree.value[node] = _majority(ys, c)
            s = idx.size
            node_counts = np.bincount(ys, minlength=c)
            node_gini = 1.0 - np.sum((node_counts / s) ** 2)
            if (
                s < 2 * cfg.min_samples_leaf
                or node_gini == 0.0
                or (cfg.max_depth is not None and depth >= cfg.max_depth)
            ):
                continue
            node_x = x[idx]
            node_onehot = y_onehot[idx]
            perm = rng.permutation(x.shape[1])
            best = None  # (weighted_gini, feature, threshold)
            inspected = 0
            for f in perm:
                res = _best_split_on_feature(
                    node_x[:, f], node_onehot, cfg.min_samples_leaf
                )
                inspected += 1
                if res is not None:
                    wg, thr = res
                    if best is None or wg < best[0]:
                        best = (wg, int(f), thr)
                # keep drawing past k only while nothing valid has been found
                if inspected >= k and best is not None:
                    break
            if best is None or best[0] >= node_gini:
                continue
            wg, f, thr = best
            goes_left = node_x[:, f] <= thr
            importance[f] += s * (node_gini - wg)
            tree.feature[node] = f
            tree.threshold[node] = thr
            left = tree.add_node()
            right = tree.add_node()
            tree.left[node] = left
            tree.right[node] = right
            stack.append((right, idx[~goes_left], depth + 1))
            stack.append((left, idx[goes_left], depth + 1))
        return tree, importance

    def _check_fitted(self):
        if not self.trees_:
            raise ForestError("forest is not trained")

    def votes(self, x: np.ndarray) -> np.ndarray:
        """(num_samples, num_classes) vote counts across trees."""
        self._check_fitted()
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.num_features_:
            raise ForestError(
                f"X must be 2-d with {self.num_features_} columns, got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ForestError("non-finite feature values are a hard error")
        out = np.zeros((x.shape[0], self.num_classes_), dtype=np.int64)
        rows = np.arange(x.shape[0])
        for tree in self.trees_:
            out[rows, tree.predict(x)] += 1
        return out

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Majority vote; ties resolve to the lowest class id."""
        return np.argmax(self.votes(x), axis=1)

    def predict_tree(self, i: int, x: np.ndarray) -> np.ndarray:
        self._check_fitted()
        return self.trees_[i].predict(np.asarray(x, dtype=np.float64))

    def feature_importances(self) -> np.ndarray:
        """Mean impurity decrease per feature, normalized to sum 1.

        A forest that never split (for instance single-class training data)
        has no impurity signal; the uniform vector is returned so the sum-1
        contract holds regardless.
        """
        self._check_fitted()
        acc = self._importance_accum
        total = acc.sum()
        if total <= 0:
            return np.full(self.num_features_, 1.0 / self.num_features_)
        return acc / total
