"""Config-driven training, schema-checked prediction, and model files."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import ConfigurationError, InputError, ModelFormatError
from ..features import X_FEATURE_NAMES, FeatureVector
from ..signal import FilterConfig
from .base import argmax_lowest
from .forest import BaggedTreesClassifier, RandomForestActivityClassifier
from .hierarchical import HierarchicalActivityClassifier
from .knn import KNNActivityClassifier
from .naive_bayes import GaussianNBActivityClassifier
from .persistence import (FORMAT, FORMAT_VERSION, dumps, estimator_from_dict,
                          estimator_to_dict, read_document)
from .tree import InfoGainTreeClassifier

MODEL_KINDS = ("rf", "bagging", "tree", "knn", "nb", "hierarchical")
# The value found by the tree-count sweep; exposed but not the default.
ELBOW_TREES = 129


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "rf"
    trees: int = 100
    n_features: int = 10
    k: int = 30
    min_leaf: int = 1
    seed: int = 0
    threads: int = 1
    # Side model used by the hierarchical kind.
    sub_kind: str = "rf"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.sub_kind not in MODEL_KINDS or self.sub_kind == "hierarchical":
            raise ConfigurationError(f"invalid sub_kind {self.sub_kind!r}")
        for name in ("trees", "n_features", "k", "min_leaf", "threads"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1")

    def to_dict(self):
        # ``threads`` changes wall time only, so it stays out of persisted configs.
        d = dataclasses.asdict(self)
        del d["threads"]
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown model config fields: {sorted(unknown)}")
        return cls(**d)

    def make_estimator(self, feature_names, kind=None):
        """Unfitted estimator for this config over the given column schema."""
        kind = kind or self.kind
        n = len(feature_names)
        if kind == "rf":
            if self.n_features > n:
                raise ConfigurationError(
                    f"n_features={self.n_features} exceeds the {n}-column schema")
            return RandomForestActivityClassifier(self.trees, self.n_features, self.min_leaf,
                                                  self.seed, self.threads)
        if kind == "bagging":
            return BaggedTreesClassifier(self.trees, self.min_leaf, self.seed, self.threads)
        if kind == "tree":
            return InfoGainTreeClassifier(None, self.min_leaf, self.seed)
        if kind == "knn":
            return KNNActivityClassifier(self.k)
        if kind == "nb":
            return GaussianNBActivityClassifier()
        sub = [i for i, name in enumerate(feature_names) if name in X_FEATURE_NAMES]
        main = [i for i in range(n) if i not in set(sub)]
        if not sub or not main:
            raise ConfigurationError(
                "hierarchical models need both the main feature columns and the xsub-* columns")
        sub_names = [feature_names[i] for i in sub]
        return HierarchicalActivityClassifier(
            main_estimator=self.make_estimator([feature_names[i] for i in main], "rf"),
            sub_estimator=self.make_estimator(sub_names, self.sub_kind),
            main_columns=main, sub_columns=sub)


@dataclass(frozen=True)
class Prediction:
    label: str
    probabilities: dict

    @property
    def confidence(self) -> float:
        return float(self.probabilities[self.label])


@dataclass
class TrainedModel:
    """A fitted estimator bundled with the schema and config that produced it."""

    estimator: object
    feature_names: tuple
    config: ModelConfig
    filters: Optional[FilterConfig] = None

    @property
    def kind(self):
        return self.config.kind

    @property
    def classes(self):
        return tuple(str(c) for c in self.estimator.classes_)

    def _matrix(self, X, names=None):
        if names is not None and tuple(names) != self.feature_names:
            raise InputError(
                f"feature schema mismatch: model expects {len(self.feature_names)} columns "
                f"({self.feature_names[0]} ... {self.feature_names[-1]}), got {len(names)}")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None]
        if X.shape[1] != len(self.feature_names):
            raise InputError(
                f"feature schema mismatch: model expects {len(self.feature_names)} values, got {X.shape[1]}")
        return X

    def predict_proba(self, X, names=None) -> np.ndarray:
        return self.estimator.predict_proba(self._matrix(X, names))

    def predict_labels(self, X, names=None) -> np.ndarray:
        proba = self.predict_proba(X, names)
        return np.array(self.classes, dtype=object)[argmax_lowest(proba)]

    def predict(self, fv) -> Prediction:
        """Classify one feature vector (a :class:`FeatureVector` or a plain row)."""
        names = fv.names if isinstance(fv, FeatureVector) else None
        values = fv.values if isinstance(fv, FeatureVector) else fv
        proba = self.predict_proba(values, names)[0]
        label = self.classes[int(argmax_lowest(proba[None])[0])]
        return Prediction(label, {c: float(p) for c, p in zip(self.classes, proba)})

    def to_document(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "filters": None if self.filters is None else dataclasses.asdict(self.filters),
            "feature_names": list(self.feature_names),
            "classes": list(self.classes),
            "estimator": estimator_to_dict(self.estimator),
        }


def train(config: ModelConfig, ds, filters: Optional[FilterConfig] = None) -> TrainedModel:
    """Fit the estimator described by ``config`` on a :class:`FeatureDataset`."""
    if len(ds) == 0:
        raise InputError("cannot train on an empty dataset")
    est = config.make_estimator(ds.feature_names)
    est.fit(ds.X, ds.y)
    return TrainedModel(est, tuple(ds.feature_names), config, filters)


def train_hierarchical(configs, ds, filters: Optional[FilterConfig] = None) -> TrainedModel:
    """Main-activity model plus a left/right side model.

    ``configs`` is ``(main_config, side_config)`` or a single config whose
    ``sub_kind`` picks the side model. ``ds`` must carry the hierarchical
    column schema (full features followed by the ``xsub-*`` columns).
    """
    if isinstance(configs, ModelConfig):
        main_cfg, sub_cfg = configs, dataclasses.replace(configs, kind=configs.sub_kind)
    else:
        main_cfg, sub_cfg = configs
    if main_cfg.kind == "hierarchical":
        main_cfg = dataclasses.replace(main_cfg, kind="rf")
    if sub_cfg.kind == "hierarchical":
        raise ConfigurationError("the side model cannot itself be hierarchical")
    if not np.isin(ds.y.astype(str), ["jump_left", "jump_right"]).any():
        raise InputError("hierarchical training needs lateral (jump) rows")
    names = tuple(ds.feature_names)
    sub = [i for i, n in enumerate(names) if n in X_FEATURE_NAMES]
    main = [i for i in range(len(names)) if i not in set(sub)]
    if not sub or not main:
        raise ConfigurationError("dataset lacks the hierarchical column schema")
    est = HierarchicalActivityClassifier(
        main_estimator=main_cfg.make_estimator([names[i] for i in main], main_cfg.kind),
        sub_estimator=sub_cfg.make_estimator([names[i] for i in sub], sub_cfg.kind),
        main_columns=main, sub_columns=sub)
    est.fit(ds.X, ds.y)
    cfg = dataclasses.replace(main_cfg, kind="hierarchical", sub_kind=sub_cfg.kind)
    return TrainedModel(est, names, cfg, filters)


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(model.to_document()))
        fh.write("\n")


def load_model(path) -> TrainedModel:
    doc = read_document(path)
    try:
        config = ModelConfig.from_dict(doc["config"])
        filters = None if doc["filters"] is None else FilterConfig(**doc["filters"])
        names = tuple(doc["feature_names"])
        est = estimator_from_dict(doc["estimator"])
    except (KeyError, TypeError, ConfigurationError) as exc:
        raise ModelFormatError(f"{path}: invalid model file ({exc})") from None
    if est.n_features_in_ != len(names):
        raise ModelFormatError(f"{path}: estimator width does not match the stored schema")
    if [str(c) for c in est.classes_] != list(doc["classes"]):
        raise ModelFormatError(f"{path}: class list does not match the estimator")
    return TrainedModel(est, names, config, filters)
