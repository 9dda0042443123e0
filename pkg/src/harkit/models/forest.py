"""Bootstrap tree ensembles: random forest and plain bagging."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..exceptions import ConfigurationError
from .base import ActivityClassifier
from .tree import TreeStructure, grow_tree


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Independent stream per tree, so results do not depend on worker count."""
    return np.random.default_rng([int(seed), int(tree_index)])


class RandomForestActivityClassifier(ActivityClassifier):
    """Random forest of unpruned information-gain trees.

    Each tree sees a bootstrap sample the size of the training set and draws
    ``max_features`` candidate features at every node. Probabilities are
    vote fractions, so they are always multiples of ``1 / n_estimators``.

    Parameters
    ----------
    n_estimators : int, default=100
    max_features : int or None, default=10
        ``None`` considers every feature at every node (plain bagging).
    min_leaf : int, default=1
    random_state : int, default=0
    n_jobs : int, default=1
        Worker threads used while growing trees.
    """

    def __init__(self, n_estimators=100, max_features=10, min_leaf=1, random_state=0, n_jobs=1):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.min_leaf = min_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _grow(self, X, codes, t):
        rng = tree_rng(self.random_state, t)
        n, d = X.shape
        boot = rng.integers(0, n, size=n)
        max_features = self.max_features
        if max_features is not None and max_features >= d:
            max_features = None
        return grow_tree(X[boot], codes[boot], len(self.classes_), max_features,
                         self.min_leaf, rng)

    def _fit(self, X, codes):
        if self.n_estimators < 1:
            raise ConfigurationError("n_estimators must be >= 1")
        d = X.shape[1]
        if self.max_features is not None and not 1 <= self.max_features <= d:
            raise ConfigurationError(
                f"max_features must lie in [1, {d}], got {self.max_features}")
        workers = max(1, int(self.n_jobs or 1))
        if workers == 1:
            trees = [self._grow(X, codes, t) for t in range(self.n_estimators)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trees = list(pool.map(lambda t: self._grow(X, codes, t),
                                      range(self.n_estimators)))
        self.estimators_ = trees

    def _votes(self, X):
        votes = np.zeros((X.shape[0], len(self.classes_)))
        rows = np.arange(X.shape[0])
        for tree in self.estimators_:
            leaf = tree.counts[tree.apply(X)]
            votes[rows, np.argmax(leaf, axis=1)] += 1
        return votes

    def _predict_proba(self, X):
        return self._votes(X) / len(self.estimators_)

    def _get_state(self):
        return {"trees": [t.to_state() for t in self.estimators_]}

    def _set_state(self, state):
        self.estimators_ = [TreeStructure.from_state(t) for t in state["trees"]]


class BaggedTreesClassifier(RandomForestActivityClassifier):
    """Bootstrap-aggregated trees without per-node feature subsampling."""

    def __init__(self, n_estimators=100, min_leaf=1, random_state=0, n_jobs=1):
        super().__init__(n_estimators=n_estimators, max_features=None, min_leaf=min_leaf,
                         random_state=random_state, n_jobs=n_jobs)

