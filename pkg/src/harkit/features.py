"""Per-window feature computation.

The full feature vector has 102 numeric columns, grouped per sensor in the
order accelerometer / gyroscope / magnetometer, followed by the
``activity-class`` label column. Magnetometer summary statistics keep their
historical ``ori-angle-*`` names even though they are computed on the raw
magnetometer axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ExtractionError, InputError
from .signal import (WINDOW_SIZE, FilterConfig, SensorWindow, fft_magnitudes,
                     magnitude)

CLASS_COLUMN = "activity-class"

_STAT_PREFIX = {"acc": "acc", "gyr": "gyr", "mag": "ori-angle"}
_STATS = ("min", "mean", "max", "var", "std")


def _build_feature_names():
    names = []
    for axis in "xyz":
        for stat in _STATS:
            for sensor in ("acc", "gyr", "mag"):
                names.append(f"{_STAT_PREFIX[sensor]}-{axis}-{stat}")
    names += ["acc-sma", "gyr-sma", "mag-sma"]
    for pair in ("xy", "xz", "yz"):
        names += [f"{s}-pcorr-{pair}" for s in ("acc", "gyr", "mag")]
    names += ["acc-x-min-max-diff", "acc-x-amprange"]
    names += [f"acc-x-mean-{q}quarter" for q in range(1, 5)]
    for axis in "xyz":
        names += [f"acc-{axis}-aptd", f"gyr-{axis}-aptd"]
    for axis in "xyz":
        names += [f"acc-{axis}-mad", f"gyr-{axis}-mad"]
    for kind in ("energy", "entropy", "kurtosis"):
        for axis in "xyz":
            names += [f"{s}-{axis}-{kind}" for s in ("acc", "gyr", "mag")]
    return tuple(names)


FEATURE_NAMES = _build_feature_names()
assert len(FEATURE_NAMES) == 102

# Columns removed for the reduced schema after the info-gain / correlation review.
REDUCED_DROP = (
    "acc-x-aptd", "acc-y-aptd", "acc-z-aptd",
    "gyr-x-aptd", "gyr-y-aptd", "gyr-z-aptd",
    "gyr-x-mad", "gyr-y-mad", "gyr-z-mad",
)
REDUCED_FEATURE_NAMES = tuple(n for n in FEATURE_NAMES if n not in REDUCED_DROP)

SCHEMAS = {"full103": FEATURE_NAMES, "reduced94": REDUCED_FEATURE_NAMES}

# Sub-model columns get their own prefix so they never clash with the full set.
X_FEATURE_NAMES = (
    tuple(f"xsub-raw-{i:02d}" for i in range(WINDOW_SIZE))
    + ("xsub-min", "xsub-max")
    + tuple(f"xsub-mean-{q}quarter" for q in range(1, 5))
    + ("xsub-amprange", "xsub-min-max-diff")
)
assert len(X_FEATURE_NAMES) == 72


def _series(series, min_len=1) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < min_len:
        raise InputError(f"expected a 1-D series of length >= {min_len}, got shape {x.shape}")
    return x


def basic_stats(series):
    """``(min, mean, max, variance, std)`` with population variance."""
    x = _series(series)
    mean = x.mean()
    var = np.mean((x - mean) ** 2)
    return float(x.min()), float(mean), float(x.max()), float(var), float(math.sqrt(var))


def pearson_corr(a, b) -> float:
    """Pearson correlation; 0 when either input has zero spread."""
    a = _series(a, 2)
    b = _series(b, 2)
    if a.shape != b.shape:
        raise InputError(f"length mismatch: {a.size} vs {b.size}")
    da = a - a.mean()
    db = b - b.mean()
    ma = float(np.max(np.abs(da)))
    mb = float(np.max(np.abs(db)))
    if ma == 0.0 or mb == 0.0:
        return 0.0
    # r is scale-free; normalising first keeps tiny spreads from underflowing.
    da /= ma
    db /= mb
    r = float(np.dot(da, db)) / math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    return max(-1.0, min(1.0, r))


def sma(window) -> float:
    """Signal magnitude area: the plain sum of per-sample 3-axis magnitudes."""
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[1] != 3:
        raise InputError(f"expected an (n, 3) block, got shape {w.shape}")
    return float(np.sum(magnitude(w[:, 0], w[:, 1], w[:, 2])))


def mad(series) -> float:
    x = _series(series)
    return float(np.median(np.abs(x - np.median(x))))


def _extrema_indices(x: np.ndarray) -> list:
    # Candidates: both endpoints, interior peaks (x[i] > x[i-1] and x[i] >= x[i+1])
    # and interior troughs (mirrored). The candidate run is then forced to
    # alternate: equal-valued neighbours are dropped and a monotone continuation
    # replaces the previous point, so only genuine turning points survive.
    n = x.size
    candidates = [0]
    for i in range(1, n - 1):
        if (x[i] > x[i - 1] and x[i] >= x[i + 1]) or (x[i] < x[i - 1] and x[i] <= x[i + 1]):
            candidates.append(i)
    if n > 1:
        candidates.append(n - 1)
    kept = [candidates[0]]
    for i in candidates[1:]:
        if x[i] == x[kept[-1]]:
            continue
        if len(kept) >= 2 and (x[i] > x[kept[-1]]) == (x[kept[-1]] > x[kept[-2]]):
            kept[-1] = i
            continue
        kept.append(i)
    return kept


def aptd(series) -> float:
    """Average peak-trough difference over consecutive alternating extrema."""
    x = _series(series)
    ext = _extrema_indices(x)
    if len(ext) < 2:
        return 0.0
    values = x[ext]
    diffs = np.abs(np.diff(values))
    return float(diffs.sum() / diffs.size)


def kurtosis(series) -> float:
    """Excess kurtosis from population moments; 0 for a zero-variance series."""
    x = _series(series)
    d = x - x.mean()
    m2 = float(np.mean(d * d))
    if m2 == 0.0:
        return 0.0
    m4 = float(np.mean(d ** 4))
    return m4 / (m2 * m2) - 3.0


def spectral_energy(series, squared_magnitudes: bool = False) -> float:
    """Square of the summed FFT coefficient magnitudes.

    With ``squared_magnitudes=True`` the conventional ``sum |X_k|^2`` is
    returned instead.
    """
    mags = fft_magnitudes(_series(series))
    if squared_magnitudes:
        return float(np.sum(mags * mags))
    return float(np.sum(mags) ** 2)


def spectral_entropy(series) -> float:
    """Base-10 Shannon entropy of the normalised FFT magnitude spectrum.

    Non-negative by construction; 0 for the all-zero series.
    """
    mags = fft_magnitudes(_series(series))
    total = mags.sum()
    if total == 0.0:
        return 0.0
    p = mags[mags > 0] / total
    h = -float(np.sum(p * np.log10(p)))
    return max(h, 0.0)


def quarter_means(series):
    x = _series(series)
    if x.size % 4:
        raise InputError(f"series length {x.size} is not divisible by 4")
    return [float(q.mean()) for q in x.reshape(4, -1)]


def minmax_pos_diff(series) -> int:
    """Index of the maximum minus index of the minimum (first occurrences)."""
    x = _series(series)
    return int(np.argmax(x)) - int(np.argmin(x))


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    label: Optional[str] = None
    names: tuple = FEATURE_NAMES

    def __getitem__(self, name):
        return float(self.values[self.names.index(name)])

    def as_dict(self):
        return dict(zip(self.names, map(float, self.values)))


@dataclass(frozen=True)
class XAxisFeatureVector:
    raw: np.ndarray
    min: float
    max: float
    quarter_means: tuple
    amp_range: float
    minmax_pos_diff: int
    label: Optional[str] = None

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([
            self.raw,
            [self.min, self.max],
            self.quarter_means,
            [self.amp_range, float(self.minmax_pos_diff)],
        ])


def _check_finite(names, values):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ExtractionError(names[bad[0]])


def feature_values(data: np.ndarray) -> np.ndarray:
    """All 102 features of an already-filtered ``(64, 9)`` block, in column order."""
    d = np.asarray(data, dtype=float)
    cols = {}
    for s_idx, sensor in enumerate(("acc", "gyr", "mag")):
        block = d[:, 3 * s_idx:3 * s_idx + 3]
        for a_idx, axis in enumerate("xyz"):
            col = block[:, a_idx]
            for stat, v in zip(_STATS, basic_stats(col)):
                cols[f"{_STAT_PREFIX[sensor]}-{axis}-{stat}"] = v
            mags = fft_magnitudes(col)
            total = mags.sum()
            cols[f"{sensor}-{axis}-energy"] = float(total ** 2)
            if total == 0.0:
                cols[f"{sensor}-{axis}-entropy"] = 0.0
            else:
                p = mags[mags > 0] / total
                cols[f"{sensor}-{axis}-entropy"] = max(-float(np.sum(p * np.log10(p))), 0.0)
            cols[f"{sensor}-{axis}-kurtosis"] = kurtosis(col)
            if sensor != "mag":
                cols[f"{sensor}-{axis}-aptd"] = aptd(col)
                cols[f"{sensor}-{axis}-mad"] = mad(col)
        cols[f"{sensor}-sma"] = sma(block)
        for pair, (i, j) in (("xy", (0, 1)), ("xz", (0, 2)), ("yz", (1, 2))):
            cols[f"{sensor}-pcorr-{pair}"] = pearson_corr(block[:, i], block[:, j])
    ax = d[:, 0]
    cols["acc-x-min-max-diff"] = float(minmax_pos_diff(ax))
    cols["acc-x-amprange"] = float(ax.max() - ax.min())
    for q, v in enumerate(quarter_means(ax), start=1):
        cols[f"acc-x-mean-{q}quarter"] = v
    return np.array([cols[n] for n in FEATURE_NAMES])


def _window_block(window) -> tuple:
    if isinstance(window, SensorWindow):
        return window.data, window.label
    return np.asarray(window, dtype=float), None


def extract_features(window, filters: Optional[FilterConfig] = None) -> FeatureVector:
    """Filter a window and compute its 102-feature vector; the label is carried over."""
    data, label = _window_block(window)
    filters = FilterConfig() if filters is None else filters
    with np.errstate(invalid="ignore", over="ignore"):
        values = feature_values(filters.apply(data))
    _check_finite(FEATURE_NAMES, values)
    return FeatureVector(values, label)


def extract_x_features(window, filters: Optional[FilterConfig] = None) -> XAxisFeatureVector:
    """Accelerometer-x sub-feature set used to tell left from right movements."""
    data, label = _window_block(window)
    filters = FilterConfig() if filters is None else filters
    with np.errstate(invalid="ignore", over="ignore"):
        x = filters.apply(data)[:, 0]
    lo, hi = float(x.min()), float(x.max())
    fv = XAxisFeatureVector(
        raw=x.copy(), min=lo, max=hi, quarter_means=tuple(quarter_means(x)),
        amp_range=hi - lo, minmax_pos_diff=minmax_pos_diff(x), label=label,
    )
    _check_finite(X_FEATURE_NAMES, fv.values)
    return fv


class WindowFeatureExtractor(TransformerMixin, BaseEstimator):
    """Transform ``(n, 64, 9)`` windows into feature rows.

    Parameters
    ----------
    filters : FilterConfig or None
        Pre-extraction filtering; ``None`` means the default config.
    feature_set : {"full103", "reduced94", "x_axis", "hierarchical"}
        Which columns to emit. ``hierarchical`` is the full set followed by
        the 72 accelerometer-x columns.
    """

    def __init__(self, filters=None, feature_set="full103"):
        self.filters = filters
        self.feature_set = feature_set

    def fit(self, X, y=None):
        self.feature_names_out_ = np.array(feature_names_for(self.feature_set), dtype=object)
        self.n_features_out_ = len(self.feature_names_out_)
        return self

    def transform(self, X):
        windows = np.asarray(X, dtype=float)
        if windows.ndim == 2:
            windows = windows[None]
        if windows.ndim != 3 or windows.shape[1:] != (WINDOW_SIZE, 9):
            raise InputError(f"expected windows of shape (n, {WINDOW_SIZE}, 9), got {windows.shape}")
        names = feature_names_for(self.feature_set)
        rows = [window_feature_row(w, self.filters, names) for w in windows]
        return np.array(rows).reshape(len(rows), len(names))

    def get_feature_names_out(self, input_features=None):
        return np.array(feature_names_for(self.feature_set), dtype=object)


def feature_names_for(feature_set) -> tuple:
    if feature_set in SCHEMAS:
        return SCHEMAS[feature_set]
    if feature_set == "x_axis":
        return X_FEATURE_NAMES
    if feature_set == "hierarchical":
        return FEATURE_NAMES + X_FEATURE_NAMES
    raise InputError(f"unknown feature set {feature_set!r}")


def window_feature_row(window, filters, names) -> np.ndarray:
    """Values for an arbitrary ordered subset of the known columns.

    Names may come from the full set, the x-axis set, or both.
    """
    lookup = {}
    if any(n in FEATURE_NAMES for n in names):
        lookup.update(zip(FEATURE_NAMES, extract_features(window, filters).values))
    if any(n in X_FEATURE_NAMES for n in names):
        lookup.update(zip(X_FEATURE_NAMES, extract_x_features(window, filters).values))
    try:
        return np.array([lookup[n] for n in names])
    except KeyError as exc:
        raise InputError(f"unknown feature column {exc.args[0]!r}") from None
