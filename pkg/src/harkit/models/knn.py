"""k-nearest-neighbour voting over min-max normalised features."""
from __future__ import annotations

import numpy as np

from ..exceptions import ConfigurationError
from .base import ActivityClassifier


class KNNActivityClassifier(ActivityClassifier):
    """Unweighted k-NN vote with Euclidean distance.

    Features are scaled to [0, 1] by the training min/max; zero-range
    features map to 0 for every row so they never contribute. Equal distances
    keep training order, and the probability of a class is its share of the
    ``k`` votes (all rows vote when fewer than ``k`` are stored).
    """

    def __init__(self, n_neighbors=30):
        self.n_neighbors = n_neighbors

    def _fit(self, X, codes):
        if self.n_neighbors < 1:
            raise ConfigurationError("n_neighbors must be >= 1")
        self.min_ = X.min(axis=0)
        span = X.max(axis=0) - self.min_
        self.scale_ = np.where(span > 0, span, 1.0)
        self.active_ = span > 0
        self.train_X_ = self._normalise(X)
        self.train_codes_ = codes

    def _normalise(self, X):
        return np.where(self.active_, (X - self.min_) / self.scale_, 0.0)

    def kneighbors(self, X):
        """Indices of the ``k`` nearest stored rows, closest first."""
        Xq = self._normalise(self._check_X(X))
        k = min(self.n_neighbors, self.train_X_.shape[0])
        out = np.empty((Xq.shape[0], k), dtype=np.intp)
        for start in range(0, Xq.shape[0], 32):
            block = Xq[start:start + 32]
            d2 = ((block[:, None, :] - self.train_X_[None, :, :]) ** 2).sum(axis=2)
            out[start:start + 32] = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return out

    def _predict_proba(self, X):
        idx = self.kneighbors(X)
        n_classes = len(self.classes_)
        votes = np.zeros((idx.shape[0], n_classes))
        for c in range(n_classes):
            votes[:, c] = (self.train_codes_[idx] == c).sum(axis=1)
        return votes / idx.shape[1]

    def _get_state(self):
        return {"min": self.min_.tolist(), "scale": self.scale_.tolist(),
                "active": self.active_.tolist(), "train_X": self.train_X_.tolist(),
                "train_codes": self.train_codes_.tolist()}

    def _set_state(self, state):
        self.min_ = np.asarray(state["min"], dtype=float)
        self.scale_ = np.asarray(state["scale"], dtype=float)
        self.active_ = np.asarray(state["active"], dtype=bool)
        self.train_X_ = np.asarray(state["train_X"], dtype=float).reshape(-1, self.min_.size)
        self.train_codes_ = np.asarray(state["train_codes"], dtype=np.intp)
