"""Information-gain decision trees with midpoint numeric thresholds."""
from __future__ import annotations

import numpy as np

from ..exceptions import ConfigurationError
from .base import ActivityClassifier

_GAIN_EPS = 1e-12


def _xlogx(c):
    # Counts are >= 0; log2(max(c, 1)) makes the c == 0 term vanish.
    c = np.asarray(c, dtype=float)
    return c * np.log2(np.maximum(c, 1.0))


def entropy_of_counts(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    return float(np.log2(n) - _xlogx(counts).sum() / n)


class _Split:
    __slots__ = ("gain", "feature", "threshold")

    def __init__(self, gain, feature, threshold):
        self.gain = gain
        self.feature = feature
        self.threshold = threshold


def best_split(X, codes, features, n_classes, min_leaf=1, parent_entropy=None):
    """Highest-gain binary split of ``X[:, f] <= t`` over ``features``.

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns ``None`` when no split has positive gain. Ties keep the first
    feature in ``features`` order and the lowest threshold.
    """
    n = codes.size
    if n < 2 * min_leaf or len(features) == 0:
        return None
    features = np.asarray(features)
    sub = X[:, features]
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ys = codes[order]
    left = np.cumsum(np.eye(n_classes, dtype=float)[ys], axis=0)[:-1]   # (n-1, m, C)
    total = left[-1] + np.eye(n_classes)[ys[-1]]                        # (m, C)
    right = total[None] - left
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    cost = (_xlogx(nl) - _xlogx(left).sum(axis=2)) + (_xlogx(nr) - _xlogx(right).sum(axis=2))
    valid = (xs[1:] > xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    cost = np.where(valid, cost, np.inf)
    pos = np.argmin(cost, axis=0)                    # best position per feature
    best_cost = cost[pos, np.arange(len(features))]
    j = int(np.argmin(best_cost))
    if not np.isfinite(best_cost[j]):
        return None
    if parent_entropy is None:
        parent_entropy = entropy_of_counts(total[0])
    gain = parent_entropy - best_cost[j] / n
    if gain <= _GAIN_EPS:
        return None
    i = int(pos[j])
    lo, hi = xs[i, j], xs[i + 1, j]
    threshold = lo + (hi - lo) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    return _Split(float(gain), int(features[j]), float(threshold))


class TreeStructure:
    """Flat node arrays; leaves have ``feature == -1``."""

    def __init__(self, feature, threshold, left, right, counts):
        self.feature = np.asarray(feature, dtype=np.intp)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.intp)
        self.right = np.asarray(right, dtype=np.intp)
        self.counts = np.asarray(counts, dtype=float)

    @property
    def node_count(self):
        return self.feature.size

    def apply(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] >= 0
        return node

    def leaf_distribution(self, X) -> np.ndarray:
        c = self.counts[self.apply(X)]
        return c / c.sum(axis=1, keepdims=True)

    def to_state(self):
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "counts": self.counts.tolist()}

    @classmethod
    def from_state(cls, state):
        return cls(state["feature"], state["threshold"], state["left"], state["right"],
                   np.asarray(state["counts"], dtype=float))


def grow_tree(X, codes, n_classes, max_features=None, min_leaf=1, rng=None) -> TreeStructure:
    """Grow an unpruned tree until nodes are pure or cannot be split.

    With ``max_features`` set, each node draws that many candidate features
    at random; if none of them yields positive gain the remaining features
    are examined as well, so a node only becomes a leaf when no feature helps.
    """
    n, d = X.shape
    if max_features is not None and not 1 <= max_features <= d:
        raise ConfigurationError(f"max_features must lie in [1, {d}], got {max_features}")
    if min_leaf < 1:
        raise ConfigurationError("min_leaf must be >= 1")
    rng = np.random.default_rng(rng)
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(codes[idx], minlength=n_classes).astype(float))
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n))]
    while stack:
        node, idx = stack.pop()
        node_counts = counts[node]
        if np.count_nonzero(node_counts) <= 1 or idx.size < 2 * min_leaf:
            continue
        h = entropy_of_counts(node_counts)
        Xn, yn = X[idx], codes[idx]
        if max_features is None or max_features >= d:
            split = best_split(Xn, yn, np.arange(d), n_classes, min_leaf, h)
        else:
            perm = rng.permutation(d)
            split = best_split(Xn, yn, perm[:max_features], n_classes, min_leaf, h)
            if split is None:
                split = best_split(Xn, yn, perm[max_features:], n_classes, min_leaf, h)
        if split is None:
            continue
        mask = Xn[:, split.feature] <= split.threshold
        li, ri = idx[mask], idx[~mask]
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # Right pushed first so the left subtree is expanded first (stable numbering).
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return TreeStructure(feature, threshold, left, right, counts)


class InfoGainTreeClassifier(ActivityClassifier):
    """Single unpruned information-gain tree.

    Parameters
    ----------
    max_features : int or None
        Candidate features per node; ``None`` examines all of them.
    min_leaf : int
        Minimum training rows on each side of a split.
    random_state : int
        Seed for candidate-feature sampling.

    ``predict_proba`` returns the class frequencies of the reached leaf.
    """

    def __init__(self, max_features=None, min_leaf=1, random_state=0):
        self.max_features = max_features
        self.min_leaf = min_leaf
        self.random_state = random_state

    def _fit(self, X, codes):
        self.tree_ = grow_tree(X, codes, len(self.classes_), self.max_features,
                               self.min_leaf, np.random.default_rng(self.random_state))

    def _predict_proba(self, X):
        return self.tree_.leaf_distribution(X)

    def _get_state(self):
        return {"tree": self.tree_.to_state()}

    def _set_state(self, state):
        self.tree_ = TreeStructure.from_state(state["tree"])
