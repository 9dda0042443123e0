"""File schemas, label taxonomy, ingestion and fold construction."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import InputError, LoadError, SchemaError
from .features import (CLASS_COLUMN, FEATURE_NAMES, REDUCED_FEATURE_NAMES,
                       X_FEATURE_NAMES, FeatureVector)
from .signal import AXES, WINDOW_SIZE, SensorWindow

CLASSES = ("staying", "jump_left", "jump_right", "fake_move")
SUPER_CLASSES = ("staying", "lateral_move", "fake_move")
SUB_CLASSES = ("left", "right")
LATERAL = {"jump_left": "left", "jump_right": "right"}

RAW_COLUMNS = ("timestamp_ms",) + AXES + ("label", "window_id")

FEATURE_SCHEMAS = {
    "full103": FEATURE_NAMES,
    "reduced94": REDUCED_FEATURE_NAMES,
    # Full set plus the accelerometer-x side-model columns.
    "hierarchical": FEATURE_NAMES + X_FEATURE_NAMES,
}


def to_super_class(label: str) -> str:
    return "lateral_move" if label in LATERAL else label


def validate_label(label: str, allowed=CLASSES) -> str:
    if label not in allowed:
        raise InputError(f"unknown activity label {label!r}; expected one of {', '.join(allowed)}")
    return label


def schema_name(names: Sequence[str]) -> Optional[str]:
    names = tuple(names)
    for key, schema in FEATURE_SCHEMAS.items():
        if names == schema:
            return key
    return None


# --------------------------------------------------------------------- raw data

@dataclass
class RawStream:
    """Sample-level contents of a raw CSV in file order."""

    timestamps: np.ndarray
    data: np.ndarray
    labels: list
    window_ids: list
    lines: np.ndarray
    path: Optional[str] = None

    def __len__(self):
        return len(self.data)


@dataclass
class RawDataset:
    windows: list
    path: Optional[str] = None
    # (window_id, first_line, last_line) per accepted window
    line_ranges: list = field(default_factory=list)
    rejects: list = field(default_factory=list)
    n_rows: int = 0

    def __len__(self):
        return len(self.windows)

    @property
    def labels(self):
        return [w.label for w in self.windows]

    def as_array(self) -> np.ndarray:
        """Stacked ``(n_windows, 64, 9)`` sample block."""
        if not self.windows:
            return np.empty((0, WINDOW_SIZE, 9))
        return np.stack([w.data for w in self.windows])


def _open_text(path):
    return open(path, "r", encoding="utf-8", newline="")


def read_raw_stream(path, require_labels=False) -> RawStream:
    """Parse a raw CSV into arrays; ``label`` and ``window_id`` may be blank
    unless ``require_labels`` is set."""
    path = str(path)
    timestamps, rows, labels, wids, lines = [], [], [], [], []
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise LoadError(f"cannot open raw file: {exc.strerror}", path=path) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return RawStream(np.empty(0, np.int64), np.empty((0, 9)), [], [], np.empty(0, int), path)
        header = [h.strip() for h in header]
        if tuple(header) != RAW_COLUMNS and tuple(header) != RAW_COLUMNS[:10]:
            raise SchemaError("raw header mismatch",
                              missing=[c for c in RAW_COLUMNS if c not in header],
                              extra=[c for c in header if c not in RAW_COLUMNS], path=path)
        has_meta = len(header) == len(RAW_COLUMNS)
        last_ts = None
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise LoadError(f"expected {len(header)} fields, got {len(row)}", path, line_no)
            try:
                ts = int(row[0])
                vals = [float(v) for v in row[1:10]]
            except ValueError as exc:
                raise LoadError(f"malformed numeric field ({exc})", path, line_no) from None
            if not all(math.isfinite(v) for v in vals):
                raise LoadError("non-finite sensor value", path, line_no)
            if last_ts is not None and ts < last_ts:
                raise LoadError("timestamps must be non-decreasing", path, line_no)
            last_ts = ts
            label = row[10].strip() if has_meta else ""
            wid = row[11].strip() if has_meta else ""
            if require_labels and (not label or not wid):
                raise LoadError("label and window_id are required", path, line_no)
            if label:
                try:
                    validate_label(label)
                except InputError as exc:
                    raise LoadError(str(exc), path, line_no) from None
            timestamps.append(ts)
            rows.append(vals)
            labels.append(label or None)
            wids.append(wid or None)
            lines.append(line_no)
    data = np.array(rows, dtype=float).reshape(-1, 9)
    return RawStream(np.array(timestamps, dtype=np.int64), data, labels, wids,
                     np.array(lines, dtype=int), path)


def load_raw(path, strict: bool = True) -> RawDataset:
    """Load a labelled raw CSV and group its rows into 64-sample windows by ``window_id``.

    With ``strict=False`` incomplete or mixed-label windows are reported in
    ``rejects`` instead of raising; row-level parse errors always raise.
    """
    stream = read_raw_stream(path, require_labels=True)
    groups = {}
    for i, wid in enumerate(stream.window_ids):
        groups.setdefault(wid, []).append(i)
    ds = RawDataset([], path=str(path), n_rows=len(stream))
    for wid, idx in groups.items():
        first, last = int(stream.lines[idx[0]]), int(stream.lines[idx[-1]])
        labels = {stream.labels[i] for i in idx}
        problem = None
        if len(idx) != WINDOW_SIZE:
            problem = f"window {wid!r} has {len(idx)} rows, expected {WINDOW_SIZE}"
        elif len(labels) != 1:
            problem = f"window {wid!r} mixes labels {sorted(labels)}"
        if problem:
            err = LoadError(problem, str(path), first)
            if strict:
                raise err
            ds.rejects.append((wid, len(idx), err))
            continue
        try:
            window_id = int(wid)
        except ValueError:
            window_id = len(ds.windows)
        ds.windows.append(SensorWindow(stream.data[idx], stream.timestamps[idx],
                                       label=labels.pop(), window_id=window_id))
        ds.line_ranges.append((wid, first, last))
    return ds


def write_raw(path, data, labels=None, window_ids=None, timestamps=None, period_ms=20):
    """Write samples in the canonical raw layout (mostly for fixtures and tooling)."""
    data = np.asarray(data, dtype=float)
    n = len(data)
    if timestamps is None:
        timestamps = np.arange(n, dtype=np.int64) * period_ms
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        for i in range(n):
            w.writerow([int(timestamps[i])] + [repr(float(v)) for v in data[i]]
                       + ["" if labels is None else labels[i],
                          "" if window_ids is None else window_ids[i]])


def write_raw_windows(path, windows):
    """Write labelled windows back-to-back, one ``window_id`` per window."""
    windows = list(windows)
    if not windows:
        write_raw(path, np.empty((0, 9)))
        return
    data = np.concatenate([w.data for w in windows])
    ts = np.concatenate([w.timestamps for w in windows])
    labels = [w.label for w in windows for _ in range(WINDOW_SIZE)]
    wids = [w.window_id for w in windows for _ in range(WINDOW_SIZE)]
    if np.any(np.diff(ts) < 0):
        # Windows built independently restart their clocks; renumber at 50 Hz.
        ts = np.arange(len(data), dtype=np.int64) * 20
    write_raw(path, data, labels, wids, ts)


# ----------------------------------------------------------------- feature data

class FeatureDataset:
    """Labelled feature matrix with an ordered column schema.

    Instances are treated as immutable; operations return new datasets.
    """

    def __init__(self, X, y, feature_names=FEATURE_NAMES):
        X = np.asarray(X, dtype=float)
        feature_names = tuple(feature_names)
        if X.ndim != 2:
            X = X.reshape(len(y), -1) if len(y) else np.empty((0, len(feature_names)))
        if X.shape[1] != len(feature_names):
            raise InputError(f"{X.shape[1]} columns for a {len(feature_names)}-name schema")
        if len(y) != X.shape[0]:
            raise InputError(f"{X.shape[0]} rows but {len(y)} labels")
        self.X = X
        self.X.setflags(write=False)
        self.y = np.array([str(v) for v in y], dtype=object)
        self.feature_names = feature_names

    def __len__(self):
        return self.X.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FeatureDataset):
            return NotImplemented
        return (self.feature_names == other.feature_names
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.X, other.X))

    def __repr__(self):
        return f"FeatureDataset(rows={len(self)}, features={len(self.feature_names)})"

    @property
    def n_attributes(self) -> int:
        """Numeric columns plus the class column."""
        return len(self.feature_names) + 1

    @property
    def schema(self) -> Optional[str]:
        return schema_name(self.feature_names)

    def class_counts(self) -> dict:
        labels, counts = np.unique(self.y.astype(str), return_counts=True)
        order = {c: i for i, c in enumerate(CLASSES)}
        pairs = sorted(zip(labels, counts), key=lambda p: (order.get(p[0], len(order)), p[0]))
        return {str(k): int(v) for k, v in pairs}

    def column(self, name) -> np.ndarray:
        try:
            return self.X[:, self.feature_names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def subset(self, idx) -> "FeatureDataset":
        idx = np.asarray(idx)
        return FeatureDataset(self.X[idx], self.y[idx], self.feature_names)

    def select(self, names) -> "FeatureDataset":
        names = tuple(names)
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise SchemaError("cannot select columns", missing=missing)
        cols = [self.feature_names.index(n) for n in names]
        return FeatureDataset(self.X[:, cols], self.y, names)

    def rows(self):
        for x, label in zip(self.X, self.y):
            yield FeatureVector(x.copy(), label, self.feature_names)

    @classmethod
    def from_vectors(cls, vectors: Iterable[FeatureVector]) -> "FeatureDataset":
        vectors = list(vectors)
        if not vectors:
            return cls(np.empty((0, len(FEATURE_NAMES))), [], FEATURE_NAMES)
        names = vectors[0].names
        return cls(np.stack([v.values for v in vectors]), [v.label for v in vectors], names)


def drop_features(ds: FeatureDataset, names) -> FeatureDataset:
    names = list(names)
    unknown = [n for n in names if n not in ds.feature_names]
    if unknown:
        raise SchemaError("cannot drop unknown features", missing=unknown)
    keep = [n for n in ds.feature_names if n not in set(names)]
    return ds.select(keep)


def _format_value(v: float) -> str:
    return f"{v:.6g}"


def save_features(ds: FeatureDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.feature_names) + [CLASS_COLUMN])
        for x, label in zip(ds.X, ds.y):
            # repr is the shortest string that round-trips the float exactly.
            w.writerow([repr(float(v)) for v in x] + [label])


def load_features(path) -> FeatureDataset:
    """Read a feature CSV whose header matches one of :data:`FEATURE_SCHEMAS`."""
    path = str(path)
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise LoadError(f"cannot open feature file: {exc.strerror}", path=path) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise LoadError("empty feature file", path=path)
        header = [h.strip() for h in header]
        if not header or header[-1] != CLASS_COLUMN:
            raise SchemaError(f"last column must be {CLASS_COLUMN!r}",
                              missing=[CLASS_COLUMN] if CLASS_COLUMN not in header else [],
                              path=path)
        names = tuple(header[:-1])
        if schema_name(names) is None:
            # Report against the closest accepted layout.
            best = min(FEATURE_SCHEMAS.values(),
                       key=lambda s: len(set(s) ^ set(names)))
            raise SchemaError("feature header matches no accepted schema",
                              missing=[n for n in best if n not in names],
                              extra=[n for n in names if n not in best], path=path)
        X, y = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise LoadError(f"expected {len(header)} fields, got {len(row)}", path, line_no)
            try:
                vals = [float(v) for v in row[:-1]]
            except ValueError as exc:
                raise LoadError(f"malformed numeric field ({exc})", path, line_no) from None
            label = row[-1].strip()
            try:
                validate_label(label)
            except InputError as exc:
                raise LoadError(str(exc), path, line_no) from None
            X.append(vals)
            y.append(label)
    X = np.array(X, dtype=float).reshape(len(y), len(names))
    return FeatureDataset(X, y, names)


# ---------------------------------------------------------------- summaries

SUMMARY_FIELDS = ("min", "q1", "median", "q3", "max", "mean", "outliers")


@dataclass
class DistributionSummary:
    features: dict
    class_counts: dict
    n_rows: int

    def rows(self):
        for name, stats in self.features.items():
            yield [name] + [stats[f] for f in SUMMARY_FIELDS]


def summarize_column(values) -> dict:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InputError("cannot summarise an empty column")
    q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return {
        "min": float(x.min()), "q1": float(q1), "median": float(med), "q3": float(q3),
        "max": float(x.max()), "mean": float(x.mean()),
        "outliers": int(np.count_nonzero((x < lo) | (x > hi))),
    }


def summarize(ds: FeatureDataset) -> DistributionSummary:
    """Box-plot statistics per feature and the class histogram."""
    if len(ds) == 0:
        raise InputError("cannot summarise an empty dataset")
    feats = {name: summarize_column(ds.X[:, j]) for j, name in enumerate(ds.feature_names)}
    return DistributionSummary(feats, ds.class_counts(), len(ds))


def write_summary(summary: DistributionSummary, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("feature",) + SUMMARY_FIELDS)
    for row in summary.rows():
        w.writerow([row[0]] + [v if isinstance(v, int) else _format_value(v) for v in row[1:]])


# -------------------------------------------------------------------- folds

def stratified_folds(y, k: int, seed: int = 0) -> list:
    """Split row indices into ``k`` disjoint, class-balanced folds.

    Each class is shuffled with a seeded generator and dealt round-robin,
    continuing the deal across classes so fold sizes also stay within one.
    ``y`` may be a label array or a :class:`FeatureDataset`.
    """
    if isinstance(y, FeatureDataset):
        y = y.y
    y = np.asarray(y).astype(str)
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise InputError(f"k must be an integer >= 2, got {k!r}")
    labels, counts = np.unique(y, return_counts=True)
    small = [str(c) for c, n in zip(labels, counts) if n < k]
    if small:
        raise InputError(f"classes with fewer than k={k} rows: {', '.join(small)}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=int)
    cursor = 0
    for label in labels:
        idx = np.flatnonzero(y == label)
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = (cursor + np.arange(idx.size)) % k
        cursor = (cursor + idx.size) % k
    return [np.flatnonzero(assignment == f) for f in range(k)]
