"""Two-stage classifier: main activity first, then left/right for lateral moves."""
from __future__ import annotations

import numpy as np
from sklearn.base import clone

from ..exceptions import InputError
from .base import ActivityClassifier

_SIDE_TO_FLAT = {"left": "jump_left", "right": "jump_right"}
_FLAT_TO_SIDE = {v: k for k, v in _SIDE_TO_FLAT.items()}


class HierarchicalActivityClassifier(ActivityClassifier):
    """Gate a left/right sub-model behind a main-activity model.

    ``X`` carries both column groups; ``main_columns`` feed the main model
    (classes ``staying``, ``lateral_move``, ``fake_move``) and
    ``sub_columns`` feed the side model, which is trained only on lateral
    rows. The side model is consulted only when the main model answers
    ``lateral_move``; the whole lateral probability mass then goes to the
    chosen side, which keeps the returned label equal to the probability
    argmax.
    """

    def __init__(self, main_estimator=None, sub_estimator=None,
                 main_columns=None, sub_columns=None):
        self.main_estimator = main_estimator
        self.sub_estimator = sub_estimator
        self.main_columns = main_columns
        self.sub_columns = sub_columns

    def _columns(self, X):
        main = slice(None) if self.main_columns is None else list(self.main_columns)
        sub = slice(None) if self.sub_columns is None else list(self.sub_columns)
        return X[:, main], X[:, sub]

    def fit(self, X, y):
        y = np.asarray(y).astype(str)
        if not np.isin(y, list(_FLAT_TO_SIDE)).any():
            raise InputError("hierarchical training needs at least one jump_left/jump_right row")
        return super().fit(X, y)

    def _fit(self, X, codes):
        from .forest import RandomForestActivityClassifier

        y = self.classes_[codes]
        super_y = np.array(["lateral_move" if v in _FLAT_TO_SIDE else v for v in y], dtype=object)
        lateral = np.isin(y, list(_FLAT_TO_SIDE))
        Xm, Xs = self._columns(X)
        main = self.main_estimator or RandomForestActivityClassifier()
        sub = self.sub_estimator or RandomForestActivityClassifier()
        self.main_ = clone(main).fit(Xm, super_y)
        self.sub_ = clone(sub).fit(Xs[lateral], [_FLAT_TO_SIDE[v] for v in y[lateral]])
        # Output over the flat taxonomy even if a class is absent from training.
        self.classes_ = np.array(["staying", "jump_left", "jump_right", "fake_move"], dtype=object)

    def _predict_proba(self, X):
        Xm, Xs = self._columns(X)
        pm = self.main_.predict_proba(Xm)
        main_cls = list(self.main_.classes_)
        main_label = self.main_.classes_[np.argmax(pm, axis=1)]
        out = np.zeros((X.shape[0], len(self.classes_)))
        flat = {c: i for i, c in enumerate(self.classes_)}
        for j, c in enumerate(main_cls):
            if c != "lateral_move":
                out[:, flat[c]] = pm[:, j]
        lateral = np.flatnonzero(main_label == "lateral_move")
        if lateral.size:
            side = self.sub_.predict(Xs[lateral])
            mass = pm[lateral, main_cls.index("lateral_move")]
            for s, flat_name in _SIDE_TO_FLAT.items():
                hit = side == s
                out[lateral[hit], flat[flat_name]] = mass[hit]
        # Rows where the main model did not choose lateral keep that mass unassigned:
        # split it evenly over the two jumps so every row sums to one.
        if "lateral_move" in main_cls:
            rest = np.setdiff1d(np.arange(X.shape[0]), lateral)
            half = pm[rest, main_cls.index("lateral_move")] / 2.0
            out[rest, flat["jump_left"]] += half
            out[rest, flat["jump_right"]] += half
        return out


    def _get_state(self):
        from .persistence import estimator_to_dict
        return {"main": estimator_to_dict(self.main_), "sub": estimator_to_dict(self.sub_)}

    def _set_state(self, state):
        from .persistence import estimator_from_dict
        self.main_ = estimator_from_dict(state["main"])
        self.sub_ = estimator_from_dict(state["sub"])
