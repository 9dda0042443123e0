"""Cross-validation, metrics, feature ranking and experiment descriptors."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dataset import (LATERAL, FeatureDataset, drop_features,
                      load_features, load_raw, stratified_folds, to_super_class)
from .exceptions import ConfigurationError, InputError
from .features import REDUCED_DROP, WindowFeatureExtractor, feature_names_for
from .models import ModelConfig, ordered_classes, train
from .signal import FilterConfig

REPORT_HEADER = "# harkit-report v1"


@dataclass
class MetricsReport:
    classes: tuple
    confusion: np.ndarray
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    mae: float
    rmse: float
    fold_fingerprint: Optional[str] = None

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    def percentages(self) -> dict:
        return {
            "accuracy": round(100 * self.accuracy, 2),
            "precision": round(100 * self.weighted_precision, 2),
            "recall": round(100 * self.weighted_recall, 2),
            "f1": round(100 * self.weighted_f1, 2),
            "mae": round(100 * self.mae, 2),
            "rmse": round(100 * self.rmse, 2),
        }


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def metrics_from_confusion(confusion, proba=None, true_codes=None, classes=None) -> MetricsReport:
    """Accuracy, per-class and support-weighted P/R/F1, and probability errors.

    ``confusion[i, j]`` counts rows of true class ``i`` predicted as ``j``.
    Undefined ratios (empty row or column) are 0. ``proba`` (n × C) and
    ``true_codes`` (n,) drive MAE/RMSE, averaged over instances and classes;
    both are 0 when omitted.
    """
    cm = np.asarray(confusion)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise InputError(f"confusion matrix must be square, got shape {cm.shape}")
    if np.any(cm < 0):
        raise InputError("confusion matrix entries must be non-negative")
    cm = cm.astype(np.int64)
    total = cm.sum()
    tp = np.diag(cm).astype(float)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    precision = _safe_div(tp, predicted)
    recall = _safe_div(tp, support)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    weights = support / total if total else np.zeros_like(tp)
    mae = rmse = 0.0
    if proba is not None:
        proba = np.asarray(proba, dtype=float)
        onehot = np.zeros_like(proba)
        onehot[np.arange(len(proba)), np.asarray(true_codes, dtype=int)] = 1.0
        err = proba - onehot
        if err.size:
            mae = float(np.mean(np.abs(err)))
            rmse = float(np.sqrt(np.mean(err ** 2)))
    if classes is None:
        classes = tuple(str(i) for i in range(cm.shape[0]))
    return MetricsReport(
        classes=tuple(classes), confusion=cm,
        accuracy=float(tp.sum() / total) if total else 0.0,
        precision=precision, recall=recall, f1=f1,
        weighted_precision=float(weights @ precision),
        weighted_recall=float(weights @ recall),
        weighted_f1=float(weights @ f1),
        mae=mae, rmse=rmse,
    )


def fold_fingerprint(folds) -> str:
    h = hashlib.sha256()
    for f in folds:
        h.update(np.asarray(f, dtype=np.int64).tobytes())
        h.update(b"|")
    return h.hexdigest()[:16]


def _run_fold(config, ds, test_idx, classes):
    train_mask = np.ones(len(ds), dtype=bool)
    train_mask[test_idx] = False
    model = train(config, ds.subset(np.flatnonzero(train_mask)))
    proba = model.predict_proba(ds.X[test_idx])
    # Re-align to the dataset-wide class list (a class can be absent from a fold).
    aligned = np.zeros((len(test_idx), len(classes)))
    for j, c in enumerate(model.classes):
        aligned[:, classes.index(c)] = proba[:, j]
    return aligned


def cross_validate(config: ModelConfig, ds: FeatureDataset, k: int = 10, seed: int = 0,
                   folds=None, threads: int = 1) -> MetricsReport:
    """Stratified k-fold CV with predictions pooled over all held-out rows.

    ``threads`` evaluates folds concurrently; the pooled result is identical
    for any worker count.
    """
    if folds is None:
        folds = stratified_folds(ds.y, k, seed)
    classes = [str(c) for c in ordered_classes(ds.y)]
    fold_config = dataclasses.replace(config, threads=1) if threads > 1 else config
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda f: _run_fold(fold_config, ds, f, classes), folds))
    else:
        parts = [_run_fold(fold_config, ds, f, classes) for f in folds]
    proba = np.zeros((len(ds), len(classes)))
    for f, p in zip(folds, parts):
        proba[f] = p
    index = {c: i for i, c in enumerate(classes)}
    true_codes = np.array([index[str(v)] for v in ds.y], dtype=int)
    pred_codes = np.argmax(proba, axis=1)
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(cm, (true_codes, pred_codes), 1)
    report = metrics_from_confusion(cm, proba, true_codes, classes)
    report.fold_fingerprint = fold_fingerprint(folds)
    return report


# ------------------------------------------------------------------ ranking

@dataclass
class RankedFeatures:
    entries: list  # (name, score), best first

    def names(self):
        return [n for n, _ in self.entries]

    def score(self, name):
        return dict(self.entries)[name]


def class_entropy(labels) -> float:
    _, counts = np.unique(np.asarray(labels).astype(str), return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def info_gain(values, labels, bins: int = 10) -> float:
    """Information gain of a column discretised into equal-width bins."""
    x = np.asarray(values, dtype=float)
    labels = np.asarray(labels).astype(str)
    lo, hi = x.min(), x.max()
    if hi == lo:
        return 0.0
    b = np.minimum(((x - lo) / (hi - lo) * bins).astype(int), bins - 1)
    h = class_entropy(labels)
    cond = 0.0
    for v in np.unique(b):
        mask = b == v
        cond += mask.mean() * class_entropy(labels[mask])
    return max(h - cond, 0.0)


def info_gain_rank(ds: FeatureDataset, bins: int = 10) -> RankedFeatures:
    if len(ds) == 0:
        raise InputError("cannot rank features of an empty dataset")
    if bins < 2:
        raise ConfigurationError("bins must be >= 2")
    scores = [info_gain(ds.X[:, j], ds.y, bins) for j in range(len(ds.feature_names))]
    order = sorted(range(len(scores)), key=lambda j: -scores[j])  # stable on ties
    return RankedFeatures([(ds.feature_names[j], scores[j]) for j in order])


# -------------------------------------------------------------------- sweep

def elbow_sweep(ds: FeatureDataset, tree_counts, config: ModelConfig = None, k: int = 10,
                seed: int = 0, threads: int = 1, return_reports: bool = False):
    """Cross-validated accuracy per forest size, all on one shared fold split."""
    tree_counts = list(tree_counts)
    if not tree_counts:
        raise InputError("tree_counts must not be empty")
    config = config or ModelConfig()
    folds = stratified_folds(ds.y, k, seed)
    reports = [cross_validate(dataclasses.replace(config, trees=int(t)), ds, folds=folds,
                              threads=threads) for t in tree_counts]
    curve = [(int(t), r.accuracy) for t, r in zip(tree_counts, reports)]
    return (curve, reports) if return_reports else curve


# -------------------------------------------------------------- experiments

_EXPERIMENT_KEYS = {"name", "dataset", "schema", "folds", "seed", "threads"}
_FILTER_KEYS = {"smoothing", "kernel", "gravity_alpha", "highpass_alpha"}
_MODEL_KEYS = {f.name for f in dataclasses.fields(ModelConfig)} - {"seed", "threads"}


@dataclass
class ExperimentSpec:
    dataset: str
    name: str = "experiment"
    schema: str = "reduced94"
    folds: int = 10
    seed: int = 0
    threads: int = 1
    filters: Optional[FilterConfig] = None
    model: ModelConfig = field(default_factory=ModelConfig)

    @classmethod
    def from_mapping(cls, doc: dict, base_dir=None) -> "ExperimentSpec":
        doc = dict(doc)
        exp = dict(doc.pop("experiment", {}))
        filt = doc.pop("filters", None)
        model = dict(doc.pop("model", {}))
        if doc:
            raise ConfigurationError(f"unknown experiment sections: {sorted(doc)}")
        unknown = set(exp) - _EXPERIMENT_KEYS
        if unknown:
            raise ConfigurationError(f"unknown [experiment] fields: {sorted(unknown)}")
        if "dataset" not in exp:
            raise ConfigurationError("[experiment] needs a dataset path")
        schema = exp.get("schema", "reduced94")
        if schema not in ("full103", "reduced94"):
            raise ConfigurationError(f"schema must be full103 or reduced94, got {schema!r}")
        filters = None
        if filt is not None:
            unknown = set(filt) - _FILTER_KEYS
            if unknown:
                raise ConfigurationError(f"unknown [filters] fields: {sorted(unknown)}")
            defaults = FilterConfig()
            filters = FilterConfig(
                gravity_alpha=filt.get("gravity_alpha", defaults.gravity_alpha),
                highpass_alpha=filt.get("highpass_alpha", defaults.highpass_alpha),
                smoothing_kind=filt.get("smoothing", "none"),
                kernel_size=int(filt.get("kernel", defaults.kernel_size)))
        unknown = set(model) - _MODEL_KEYS
        if unknown:
            raise ConfigurationError(f"unknown [model] fields: {sorted(unknown)}")
        seed = int(exp.get("seed", 0))
        threads = int(exp.get("threads", 1))
        dataset = str(exp["dataset"])
        if base_dir is not None and not Path(dataset).is_absolute():
            dataset = str(Path(base_dir) / dataset)
        return cls(dataset=dataset, name=str(exp.get("name", "experiment")), schema=schema,
                   folds=int(exp.get("folds", 10)), seed=seed, threads=threads,
                   filters=filters, model=ModelConfig(seed=seed, **model))

    @classmethod
    def from_toml(cls, path) -> "ExperimentSpec":
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        return cls.from_mapping(doc, base_dir=Path(path).parent)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "dataset": self.dataset, "schema": self.schema,
            "folds": self.folds, "seed": self.seed,
            "filters": None if self.filters is None else dataclasses.asdict(self.filters),
            "model": self.model.to_dict(),
        }


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    report: MetricsReport
    provenance: dict
    parts: dict = field(default_factory=dict)


def is_raw_csv(path) -> bool:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    return first.startswith("timestamp_ms")


def features_from_raw(path, filters: Optional[FilterConfig], feature_set: str) -> FeatureDataset:
    raw = load_raw(path)
    ext = WindowFeatureExtractor(filters=filters, feature_set=feature_set).fit(None)
    X = ext.transform(raw.as_array()) if len(raw) else np.empty((0, ext.n_features_out_))
    return FeatureDataset(X, raw.labels, feature_names_for(feature_set))


def load_experiment_data(spec: ExperimentSpec) -> FeatureDataset:
    hier = spec.model.kind == "hierarchical"
    if is_raw_csv(spec.dataset):
        ds = features_from_raw(spec.dataset, spec.filters,
                               "hierarchical" if hier else "full103")
        if spec.schema == "reduced94":
            ds = drop_features(ds, REDUCED_DROP)
        return ds
    if spec.filters is not None:
        raise ConfigurationError("filters can only be applied to a raw sample dataset")
    ds = load_features(spec.dataset)
    if hier and ds.schema != "hierarchical":
        raise ConfigurationError(
            "hierarchical experiments need a raw dataset or a hierarchical feature file")
    if hier and spec.schema == "reduced94":
        return drop_features(ds, REDUCED_DROP)
    if spec.schema == "reduced94" and ds.schema == "full103":
        ds = drop_features(ds, REDUCED_DROP)
    elif spec.schema == "full103" and ds.schema == "reduced94":
        raise ConfigurationError("cannot widen a reduced94 feature file to full103")
    return ds


def hierarchical_parts(spec: ExperimentSpec, ds: FeatureDataset) -> dict:
    """Separate CV of the main-activity model and of the side model."""
    sub_cols = [n for n in ds.feature_names if n.startswith("xsub-")]
    main_cols = [n for n in ds.feature_names if not n.startswith("xsub-")]
    main_ds = FeatureDataset(ds.select(main_cols).X, [to_super_class(v) for v in ds.y], main_cols)
    lateral = np.flatnonzero(np.isin(ds.y.astype(str), list(LATERAL)))
    side = ds.subset(lateral).select(sub_cols)
    side_ds = FeatureDataset(side.X, [LATERAL[v] for v in side.y], sub_cols)
    main_cfg = dataclasses.replace(spec.model, kind="rf")
    side_cfg = dataclasses.replace(spec.model, kind=spec.model.sub_kind)
    return {
        "main": cross_validate(main_cfg, main_ds, spec.folds, spec.seed, threads=spec.threads),
        "side": cross_validate(side_cfg, side_ds, spec.folds, spec.seed, threads=spec.threads),
    }


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    ds = load_experiment_data(spec)
    report = cross_validate(spec.model, ds, spec.folds, spec.seed, threads=spec.threads)
    parts = hierarchical_parts(spec, ds) if spec.model.kind == "hierarchical" else {}
    provenance = {
        "spec": spec.to_dict(),
        "instances": len(ds),
        "attributes": ds.n_attributes,
        "class_counts": ds.class_counts(),
        "fold_fingerprint": report.fold_fingerprint,
    }
    return ExperimentResult(spec, report, provenance, parts)


# ---------------------------------------------------------------- reporting

def format_report(report: MetricsReport, title: str = "") -> str:
    pct = report.percentages()
    lines = []
    if title:
        lines.append(title)
    lines.append(f"instances: {report.n}")
    lines.append("Accuracy (%)  Precision (%)  Recall (%)  F1-Score (%)  MAE (%)  RMSE (%)")
    lines.append(f"{pct['accuracy']:12.2f}  {pct['precision']:13.2f}  {pct['recall']:10.2f}  "
                 f"{pct['f1']:12.2f}  {pct['mae']:7.2f}  {pct['rmse']:8.2f}")
    width = max(len(c) for c in report.classes) + 2
    lines.append("")
    lines.append("confusion (rows = true, columns = predicted)")
    lines.append(" " * width + "".join(f"{c:>{width}}" for c in report.classes))
    for c, row in zip(report.classes, report.confusion):
        lines.append(f"{c:<{width}}" + "".join(f"{v:>{width}d}" for v in row))
    lines.append("")
    lines.append(f"{'class':<{width}}{'precision':>10}{'recall':>10}{'f1':>10}")
    for i, c in enumerate(report.classes):
        lines.append(f"{c:<{width}}{100 * report.precision[i]:10.2f}"
                     f"{100 * report.recall[i]:10.2f}{100 * report.f1[i]:10.2f}")
    return "\n".join(lines) + "\n"


def report_rows(report: MetricsReport, prefix: str = ""):
    pct = report.percentages()
    for key in ("accuracy", "precision", "recall", "f1", "mae", "rmse"):
        yield [prefix + key, f"{pct[key]:.2f}"]
    yield [prefix + "instances", str(report.n)]
    for i, c in enumerate(report.classes):
        yield [f"{prefix}precision:{c}", f"{100 * report.precision[i]:.2f}"]
        yield [f"{prefix}recall:{c}", f"{100 * report.recall[i]:.2f}"]
        yield [f"{prefix}f1:{c}", f"{100 * report.f1[i]:.2f}"]
    for i, c in enumerate(report.classes):
        for j, d in enumerate(report.classes):
            yield [f"{prefix}confusion:{c}:{d}", str(int(report.confusion[i, j]))]


def write_report_csv(result: ExperimentResult, fh) -> None:
    fh.write(REPORT_HEADER + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["key", "value"])
    for key, value in _flatten("config", result.provenance["spec"]):
        w.writerow([key, value])
    w.writerow(["attributes", result.provenance["attributes"]])
    w.writerow(["fold_fingerprint", result.provenance["fold_fingerprint"]])
    for c, n in result.provenance["class_counts"].items():
        w.writerow([f"class_count:{c}", n])
    for row in report_rows(result.report):
        w.writerow(row)
    for name, part in result.parts.items():
        for row in report_rows(part, prefix=f"{name}:"):
            w.writerow(row)


def _flatten(prefix, value):
    if isinstance(value, dict):
        for k, v in value.items():
            yield from _flatten(f"{prefix}.{k}", v)
    else:
        yield prefix, "" if value is None else value
