"""Synthetic electrocardiogram stream generator.

Deterministic stand-in for a proprietary ECG feed: a periodic
PQRST-like waveform (sum of Gaussian bumps at ~72 bpm) plus seeded
noise, emitted in the sensor cadence of ten points per 93.4 ms.  Only
the cadence and payload shape matter to the system under test.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

POINTS_PER_BATCH = 10
BATCH_INTERVAL_MS = 93.4
POINT_INTERVAL_MS = BATCH_INTERVAL_MS / POINTS_PER_BATCH

_BEAT_PERIOD_S = 60.0 / 72.0
_WAVES = (  # (amplitude mV, center as beat fraction, width s)
    (0.15, 0.10, 0.025),   # P
    (-0.12, 0.22, 0.010),  # Q
    (1.20, 0.26, 0.012),   # R
    (-0.25, 0.30, 0.010),  # S
    (0.35, 0.55, 0.060),   # T
)


@dataclass(frozen=True)
class EcgPoint:
    timestamp_ms: float
    voltage_mv: float


def waveform_mv(t_s: float) -> float:
    """Noise-free voltage at absolute stream time t_s."""
    phase = (t_s % _BEAT_PERIOD_S) / _BEAT_PERIOD_S
    v = 0.0
    for amp, center, width in _WAVES:
        d = (phase - center) * _BEAT_PERIOD_S
        v += amp * math.exp(-(d * d) / (2.0 * width * width))
    return v


def batch_count(stream_seconds: float) -> int:
    """Batches needed to cover a stream (one per 93.4 ms, last partial counts)."""
    if stream_seconds <= 0:
        return 0
    return math.ceil(stream_seconds * 1000.0 / BATCH_INTERVAL_MS)


def generate_stream(stream_seconds: float, seed: int) -> list[list[EcgPoint]]:
    """All batches of one client's stream; timestamps strictly increase."""
    rng = random.Random(seed)
    batches = []
    for b in range(batch_count(stream_seconds)):
        points = []
        for j in range(POINTS_PER_BATCH):
            t_ms = (b * POINTS_PER_BATCH + j) * POINT_INTERVAL_MS
            voltage = waveform_mv(t_ms / 1000.0) + rng.gauss(0.0, 0.01)
            points.append(EcgPoint(round(t_ms, 2), round(voltage, 4)))
        batches.append(points)
    return batches


def encode_batch(points: list[EcgPoint]) -> bytes:
    """Text form submitted to the daemon: "timestamp,voltage;" repeated."""
    return "".join(f"{p.timestamp_ms:.2f},{p.voltage_mv:.4f};" for p in points).encode("ascii")
