"""JSON model container.

Layout (one UTF-8 JSON object)::

    {
      "format": "harkit-model",
      "version": 1,
      "config": {...ModelConfig fields...},
      "filters": {...FilterConfig fields...} | null,
      "feature_names": [...],
      "classes": [...],
      "estimator": {
        "class": "RandomForestActivityClassifier",
        "params": {...constructor arguments...},
        "classes": [...],
        "n_features_in": 93,
        "state": {...fitted arrays as nested lists...}
      }
    }

Floats are written with ``repr`` precision, so a reloaded model reproduces
predictions bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from ..exceptions import ModelFormatError
from .forest import BaggedTreesClassifier, RandomForestActivityClassifier
from .hierarchical import HierarchicalActivityClassifier
from .knn import KNNActivityClassifier
from .naive_bayes import GaussianNBActivityClassifier
from .tree import InfoGainTreeClassifier

FORMAT = "harkit-model"
FORMAT_VERSION = 1

# Constructor arguments that affect speed but never the fitted result.
_EXECUTION_PARAMS = frozenset({"n_jobs"})

_REGISTRY = {cls.__name__: cls for cls in (
    RandomForestActivityClassifier, BaggedTreesClassifier, InfoGainTreeClassifier,
    KNNActivityClassifier, GaussianNBActivityClassifier, HierarchicalActivityClassifier,
)}


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def _params(est) -> dict:
    params = {}
    for key, value in est.get_params(deep=False).items():
        if key in _EXECUTION_PARAMS:
            continue
        if hasattr(value, "get_params"):
            value = {"__estimator__": type(value).__name__, "params": _params(value)}
        params[key] = _plain(value)
    return params


def estimator_to_dict(est) -> dict:
    name = type(est).__name__
    if name not in _REGISTRY:
        raise ModelFormatError(f"cannot serialise estimator type {name}")
    params = _params(est)
    return {
        "class": name,
        "params": params,
        "classes": [str(c) for c in est.classes_],
        "n_features_in": int(est.n_features_in_),
        "state": est._get_state(),
    }


def estimator_from_dict(doc) -> object:
    try:
        cls = _REGISTRY[doc["class"]]
        params = {}
        for key, value in doc["params"].items():
            if isinstance(value, dict) and "__estimator__" in value:
                value = _REGISTRY[value["__estimator__"]](**value["params"])
            params[key] = value
        est = cls(**params)
        est.classes_ = np.array(doc["classes"], dtype=object)
        est.n_features_in_ = int(doc["n_features_in"])
        est._set_state(doc["state"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid estimator record: {exc!r}") from None
    return est


def dumps(document: dict) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), allow_nan=False)


def read_document(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: truncated or corrupt model file ({exc.msg})") from None
    except UnicodeDecodeError:
        raise ModelFormatError(f"{path}: not a text model file") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError(f"{path}: not a {FORMAT} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: model format version {doc.get('version')!r} is not supported "
            f"(expected {FORMAT_VERSION})")
    return doc
