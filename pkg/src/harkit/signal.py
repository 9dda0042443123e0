"""Windowing, filtering and spectral primitives for 9-axis inertial streams.

A stream is held as a ``(n_samples, 9)`` float array whose columns follow
:data:`AXES` (accelerometer, gyroscope, magnetometer; x/y/z each), plus a
parallel vector of integer millisecond timestamps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import ConfigurationError, InputError

AXES = (
    "acc_x", "acc_y", "acc_z",
    "gyr_x", "gyr_y", "gyr_z",
    "mag_x", "mag_y", "mag_z",
)
SENSORS = ("acc", "gyr", "mag")
SENSOR_SLICES = {"acc": slice(0, 3), "gyr": slice(3, 6), "mag": slice(6, 9)}

WINDOW_SIZE = 64
SAMPLE_RATE_HZ = 50
SMOOTHING_KINDS = ("none", "median", "mean")


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SensorSample:
    timestamp_ms: int
    acc: tuple
    gyr: tuple
    mag: tuple

    def __post_init__(self):
        values = self.as_array()
        if values.shape != (9,):
            raise InputError("a sample needs three values per sensor")
        if not np.all(np.isfinite(values)):
            raise InputError(f"non-finite sensor value at t={self.timestamp_ms}")

    def as_array(self) -> np.ndarray:
        return np.array([*self.acc, *self.gyr, *self.mag], dtype=float)

    @classmethod
    def from_array(cls, timestamp_ms, values) -> "SensorSample":
        v = [float(x) for x in values]
        return cls(int(timestamp_ms), tuple(v[0:3]), tuple(v[3:6]), tuple(v[6:9]))


@dataclass(frozen=True, eq=False)
class SensorWindow:
    """Exactly ``WINDOW_SIZE`` consecutive samples, the unit of classification."""

    data: np.ndarray
    timestamps: np.ndarray = None
    label: Optional[str] = None
    window_id: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != (WINDOW_SIZE, 9):
            raise InputError(
                f"window must have shape ({WINDOW_SIZE}, 9), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InputError("window contains non-finite sensor values")
        ts = self.timestamps
        if ts is None:
            ts = np.arange(WINDOW_SIZE, dtype=np.int64) * (1000 // SAMPLE_RATE_HZ)
        ts = np.asarray(ts, dtype=np.int64)
        if ts.shape != (WINDOW_SIZE,):
            raise InputError("one timestamp per sample is required")
        if np.any(np.diff(ts) < 0):
            raise InputError("timestamps must be non-decreasing")
        data.setflags(write=False)
        ts.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "timestamps", ts)

    def axis(self, name: str) -> np.ndarray:
        return self.data[:, AXES.index(name)]

    def sensor(self, name: str) -> np.ndarray:
        return self.data[:, SENSOR_SLICES[name]]

    @property
    def end_ms(self) -> int:
        return int(self.timestamps[-1])


@dataclass(frozen=True)
class FilterConfig:
    """Pre-extraction filtering.

    ``gravity_alpha`` drives the accelerometer gravity removal (``None``
    disables it); ``highpass_alpha`` applies a high-pass to the gyroscope and
    magnetometer (``None`` disables it). Smoothing runs last, on every axis.
    """

    gravity_alpha: Optional[float] = 0.8
    highpass_alpha: Optional[float] = None
    smoothing_kind: str = "none"
    kernel_size: int = 11

    def __post_init__(self):
        for name in ("gravity_alpha", "highpass_alpha"):
            a = getattr(self, name)
            if a is not None and not 0.0 <= a <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {a}")
        if self.smoothing_kind not in SMOOTHING_KINDS:
            raise ConfigurationError(
                f"smoothing_kind must be one of {SMOOTHING_KINDS}, got {self.smoothing_kind!r}")
        k = self.kernel_size
        if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0 or k > WINDOW_SIZE:
            raise ConfigurationError(
                f"kernel_size must be an odd integer in [1, {WINDOW_SIZE}], got {k!r}")

    @classmethod
    def raw(cls) -> "FilterConfig":
        """No filtering at all."""
        return cls(gravity_alpha=None, highpass_alpha=None, smoothing_kind="none")

    def apply(self, data: np.ndarray) -> np.ndarray:
        """Filter a ``(n, 9)`` block column by column and return a new array."""
        out = np.array(data, dtype=float, copy=True)
        if self.gravity_alpha is not None:
            for c in range(0, 3):
                _, out[:, c] = lowpass_gravity(out[:, c], self.gravity_alpha)
        if self.highpass_alpha is not None:
            for c in range(3, 9):
                out[:, c] = highpass(out[:, c], self.highpass_alpha)
        if self.smoothing_kind != "none":
            for c in range(9):
                out[:, c] = smooth(out[:, c], self.smoothing_kind, self.kernel_size)
        return out


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InputError(f"expected a 1-D series, got shape {x.shape}")
    if np.isnan(x).any():
        raise InputError("series contains NaN")
    return x


def window_starts(n_samples: int, size: int = WINDOW_SIZE, overlap_fraction: float = 0.5) -> list:
    """Start indices of every complete window over ``n_samples`` samples."""
    if not isinstance(size, (int, np.integer)) or not is_power_of_two(int(size)):
        raise ConfigurationError(f"window size must be a power of two, got {size!r}")
    if overlap_fraction not in (0, 0.0, 0.5):
        raise ConfigurationError(f"overlap_fraction must be 0 or 0.5, got {overlap_fraction!r}")
    step = int(size * (1 - overlap_fraction))
    if step < 1:
        raise ConfigurationError("window step must be at least one sample")
    return list(range(0, n_samples - size + 1, step)) if n_samples >= size else []


def make_windows(stream, size: int = WINDOW_SIZE, overlap_fraction: float = 0.5,
                 timestamps=None, label=None) -> list:
    """Cut a stream into fixed-size windows; a trailing partial window is dropped.

    ``stream`` is either a sequence of :class:`SensorSample` or an
    ``(n, 9)`` array (then ``timestamps`` may be given separately).
    Sample index, not wall time, drives the segmentation.
    """
    data, ts = stream_to_arrays(stream, timestamps)
    starts = window_starts(len(data), size, overlap_fraction)
    if size != WINDOW_SIZE:
        # Non-standard sizes are returned as raw blocks; SensorWindow is fixed at 64.
        return [data[s:s + size] for s in starts]
    return [SensorWindow(data[s:s + size], ts[s:s + size], label=label, window_id=i)
            for i, s in enumerate(starts)]


def stream_to_arrays(stream, timestamps=None):
    if isinstance(stream, np.ndarray):
        data = np.asarray(stream, dtype=float)
        if data.ndim != 2 or data.shape[1] != 9:
            raise InputError(f"stream array must have shape (n, 9), got {data.shape}")
        if timestamps is None:
            ts = np.arange(len(data), dtype=np.int64) * (1000 // SAMPLE_RATE_HZ)
        else:
            ts = np.asarray(timestamps, dtype=np.int64)
        return data, ts
    samples = list(stream)
    if not samples:
        return np.empty((0, 9)), np.empty(0, dtype=np.int64)
    data = np.stack([s.as_array() for s in samples])
    ts = np.array([s.timestamp_ms for s in samples], dtype=np.int64)
    return data, ts


def lowpass_gravity(series, alpha: float, g0: Optional[float] = None):
    """Exponential low-pass gravity estimate and the residual linear signal.

    ``g[t] = alpha * g[t-1] + (1 - alpha) * a[t]`` seeded with ``g[-1] = g0``;
    ``g0`` defaults to the first sample so a window starts without transient.
    Returns ``(gravity, linear)``.
    """
    a = _as_series(series)
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must lie in [0, 1], got {alpha}")
    gravity = np.empty_like(a)
    if a.size == 0:
        return gravity, gravity.copy()
    g = a[0] if g0 is None else float(g0)
    beta = 1.0 - alpha
    for t, v in enumerate(a):
        g = alpha * g + beta * v
        gravity[t] = g
    return gravity, a - gravity


def highpass(series, alpha: float, g0: Optional[float] = None) -> np.ndarray:
    """Input minus its exponential low-pass (same recurrence as gravity removal)."""
    return lowpass_gravity(series, alpha, g0)[1]


def smooth(series, kind: str, kernel: int) -> np.ndarray:
    """Centered median or mean filter with edge-replicated padding."""
    x = _as_series(series)
    if kind not in ("median", "mean"):
        raise ConfigurationError(f"smoothing kind must be 'median' or 'mean', got {kind!r}")
    if not isinstance(kernel, (int, np.integer)) or kernel < 1 or kernel % 2 == 0:
        raise ConfigurationError(f"kernel must be an odd positive integer, got {kernel!r}")
    if kernel > len(x):
        raise ConfigurationError(f"kernel {kernel} longer than series ({len(x)})")
    half = kernel // 2
    padded = np.pad(x, half, mode="edge")
    views = np.lib.stride_tricks.sliding_window_view(padded, kernel)
    if kind == "median":
        return np.median(views, axis=1)
    return views.mean(axis=1)


def magnitude(x, y, z):
    """Euclidean norm of a 3-vector; broadcasts over arrays."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    out = np.sqrt(x * x + y * y + z * z)
    return float(out) if out.ndim == 0 else out


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(series) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT over the last axis.

    Output is in natural bin order. Length must be a power of two.
    """
    x = np.asarray(series)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ConfigurationError(f"FFT length must be a power of two, got {n}")
    a = x[..., _bit_reverse_indices(n)].astype(complex)
    lead = a.shape[:-1]
    half = 1
    while half < n:
        span = 2 * half
        twiddle = np.exp(-2j * np.pi * np.arange(half) / span)
        blocks = a.reshape(*lead, n // span, span)
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * twiddle
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        a = blocks.reshape(*lead, n)
        half = span
    return a


def fft_magnitudes(series) -> np.ndarray:
    """``|X_k|`` for every bin of the radix-2 transform, no windowing function."""
    return np.abs(fft(np.asarray(series, dtype=float)))
