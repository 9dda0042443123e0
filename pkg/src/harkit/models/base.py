"""Shared pieces for the classifiers: class ordering and input checks."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import InputError

# Known label vocabularies, each in its canonical order. Ties between classes
# always resolve to the lowest index in this order.
_TAXONOMIES = (
    ("staying", "jump_left", "jump_right", "fake_move"),
    ("staying", "lateral_move", "fake_move"),
    ("left", "right"),
)


def ordered_classes(y) -> np.ndarray:
    """Unique labels in canonical taxonomy order; unknown labels sort after."""
    present = {str(v) for v in np.asarray(y, dtype=object).ravel()}
    rank = {}
    for taxonomy in _TAXONOMIES:
        for i, c in enumerate(taxonomy):
            rank.setdefault(c, i)
    return np.array(sorted(present, key=lambda c: (c not in rank, rank.get(c, 0), c)),
                    dtype=object)


def argmax_lowest(proba: np.ndarray) -> np.ndarray:
    """Row-wise argmax; exact ties go to the lowest column."""
    return np.argmax(proba, axis=1)


class ActivityClassifier(ClassifierMixin, BaseEstimator):
    """Common fit/predict plumbing.

    Subclasses implement ``_fit(X, codes)`` with integer class codes and
    ``_predict_proba(X)`` returning rows that sum to one.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, ensure_all_finite=True)
        if X.shape[0] == 0:
            raise InputError("cannot fit on an empty dataset")
        y = np.asarray(y).astype(str).astype(object)
        self.classes_ = ordered_classes(y)
        index = {c: i for i, c in enumerate(self.classes_)}
        codes = np.fromiter((index[v] for v in y), dtype=np.intp, count=len(y))
        self.n_features_in_ = X.shape[1]
        self._fit(X, codes)
        return self

    def _check_X(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if X.shape[1] != self.n_features_in_:
            raise InputError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def predict_proba(self, X):
        return self._predict_proba(self._check_X(X))

    def predict(self, X):
        return self.classes_[argmax_lowest(self.predict_proba(X))]
