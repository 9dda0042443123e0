"""Gaussian naive Bayes."""
from __future__ import annotations

import numpy as np

from .base import ActivityClassifier


class GaussianNBActivityClassifier(ActivityClassifier):
    """Per-class, per-feature normal densities with empirical class priors.

    Variances are maximum-likelihood estimates floored at ``var_floor`` so a
    constant feature cannot produce a degenerate likelihood.
    """

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def _fit(self, X, codes):
        n_classes = len(self.classes_)
        self.theta_ = np.zeros((n_classes, X.shape[1]))
        self.var_ = np.zeros((n_classes, X.shape[1]))
        self.class_count_ = np.bincount(codes, minlength=n_classes).astype(float)
        for c in range(n_classes):
            rows = X[codes == c]
            self.theta_[c] = rows.mean(axis=0)
            self.var_[c] = np.maximum(rows.var(axis=0), self.var_floor)
        self.class_prior_ = self.class_count_ / self.class_count_.sum()

    def joint_log_likelihood(self, X):
        X = self._check_X(X)
        ll = -0.5 * (np.log(2 * np.pi * self.var_)[None].sum(axis=2)
                     + (((X[:, None, :] - self.theta_[None]) ** 2) / self.var_[None]).sum(axis=2))
        return ll + np.log(self.class_prior_)[None]

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(X)
        jll = jll - jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def _get_state(self):
        return {"theta": self.theta_.tolist(), "var": self.var_.tolist(),
                "class_count": self.class_count_.tolist()}

    def _set_state(self, state):
        self.theta_ = np.asarray(state["theta"], dtype=float)
        self.var_ = np.asarray(state["var"], dtype=float)
        self.class_count_ = np.asarray(state["class_count"], dtype=float)
        self.class_prior_ = self.class_count_ / self.class_count_.sum()
