"""Synthetic raw windows with class-dependent motion, for demos and tests.

The shapes are loose caricatures: a lateral jump is a two-lobed pulse on the
accelerometer x axis whose sign order encodes the direction, a fake move
is mostly wrist rotation on the gyroscope, and staying is near-still.
"""
from __future__ import annotations

import numpy as np

from .signal import WINDOW_SIZE, SensorWindow

_T = np.linspace(0.0, 1.0, WINDOW_SIZE)
_GRAVITY = np.array([0.0, 9.81, 0.0])
_FIELD = np.array([22.0, -5.0, -40.0])


def _pulse(center, width):
    return np.exp(-0.5 * ((_T - center) / width) ** 2)


def make_window(label: str, rng: np.random.Generator, noise: float = 0.15,
                window_id: int = 0) -> SensorWindow:
    data = np.zeros((WINDOW_SIZE, 9))
    data[:, 0:3] = _GRAVITY
    data[:, 6:9] = _FIELD
    shift = rng.uniform(-0.08, 0.08)
    amp = rng.uniform(0.8, 1.2)
    if label in ("jump_left", "jump_right"):
        sign = 1.0 if label == "jump_right" else -1.0
        lobe = _pulse(0.35 + shift, 0.07) - _pulse(0.6 + shift, 0.07)
        data[:, 0] += sign * 6.0 * amp * lobe
        data[:, 1] += 2.5 * amp * _pulse(0.5 + shift, 0.12)
        data[:, 5] += sign * 1.2 * amp * lobe
    elif label == "fake_move":
        osc = np.sin(2 * np.pi * (3.0 + rng.uniform(-0.5, 0.5)) * _T)
        data[:, 3] += 2.5 * amp * osc
        data[:, 4] += 1.5 * amp * np.cos(2 * np.pi * 2.0 * _T)
        data[:, 0] += 0.8 * amp * osc
        data[:, 6:9] += 4.0 * amp * osc[:, None]
    elif label != "staying":
        raise ValueError(f"unknown label {label!r}")
    data += rng.normal(0.0, noise, data.shape)
    return SensorWindow(data, label=label, window_id=window_id)


def make_windows(counts: dict, seed: int = 0, noise: float = 0.15) -> list:
    """Windows for ``{label: count}``, interleaved in a seeded random order."""
    rng = np.random.default_rng(seed)
    labels = [c for c, n in counts.items() for _ in range(n)]
    order = rng.permutation(len(labels))
    return [make_window(labels[j], rng, noise, window_id=i) for i, j in enumerate(order)]
