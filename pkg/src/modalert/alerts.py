"""Alert-threshold analytics and a streaming window monitor.

Exceedance duration is the total time a channel's acceleration magnitude stays
strictly above a threshold. Duration curves over a threshold grid, together
with per-threshold sensor-trigger counts, summarize how well a model's
predicted alerts match reality; their mean absolute difference (normalized by
record length) is the deviation scalar behind the damage index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import GridMismatch, UnsortedThresholds
from .infotheory import GaussianSummary, gaussian_kl
from .model import ModalModel, matched_response
from .signals import TimeSeriesSet, residual_series, residual_stats


@dataclass(frozen=True)
class AlertProfile:
    """Exceedance durations per channel over an ascending threshold grid.

    ``duration_s[t, c]`` is the time channel ``c`` spends above threshold
    ``thresholds[t]``; ``triggered_count[t]`` counts channels with any
    exceedance. ``record_duration_s`` is kept so profile differences can be
    normalized into a dimensionless number.
    """

    thresholds: np.ndarray
    duration_s: np.ndarray
    triggered_count: np.ndarray
    record_duration_s: float
    channel_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        thr = np.asarray(self.thresholds, dtype=float)
        dur = np.asarray(self.duration_s, dtype=float)
        cnt = np.asarray(self.triggered_count, dtype=int)
        if dur.shape != (thr.shape[0], len(self.channel_labels)):
            raise ValueError("duration_s must be (n_thresholds, n_channels)")
        if cnt.shape != thr.shape:
            raise ValueError("one trigger count per threshold required")
        if np.any(np.diff(dur, axis=0) > 1e-12):
            raise ValueError("durations must be non-increasing in threshold")
        if np.any(dur > self.record_duration_s * (1 + 1e-12)):
            raise ValueError("durations cannot exceed the record length")
        for arr in (thr, dur, cnt):
            arr.setflags(write=False)
        object.__setattr__(self, "thresholds", thr)
        object.__setattr__(self, "duration_s", dur)
        object.__setattr__(self, "triggered_count", cnt)
        object.__setattr__(self, "channel_labels", tuple(self.channel_labels))

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)


def exceedance_duration(samples, sample_rate_hz: float, threshold: float) -> float:
    """Total time the magnitude of a signal stays strictly above a threshold."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz must be positive")
    arr = np.asarray(samples, dtype=float)
    return float(np.count_nonzero(np.abs(arr) > threshold)) / sample_rate_hz


def duration_curve(data: TimeSeriesSet, thresholds) -> AlertProfile:
    """Per-channel exceedance durations over an ascending threshold grid."""
    thr = np.asarray(thresholds, dtype=float)
    if thr.ndim != 1 or thr.size < 2:
        raise UnsortedThresholds("need at least two thresholds")
    if np.any(thr < 0) or np.any(np.diff(thr) <= 0):
        raise UnsortedThresholds("thresholds must be nonnegative and strictly ascending")

    magnitude = np.abs(data.data)
    durations = np.empty((thr.size, data.n_channels))
    for i, t in enumerate(thr):
        durations[i] = np.count_nonzero(magnitude > t, axis=0) / data.sample_rate_hz
    counts = np.count_nonzero(durations > 0, axis=1)
    return AlertProfile(
        thresholds=thr,
        duration_s=durations,
        triggered_count=counts,
        record_duration_s=data.duration_s,
        channel_labels=data.labels,
    )


def duration_discrepancy(model_profile: AlertProfile, measured_profile: AlertProfile) -> float:
    """Mean absolute duration gap between two profiles, normalized to [0, 1].

    Requires identical threshold grids and channel counts; the normalizer is
    the longer of the two record durations.
    """
    if model_profile.n_channels != measured_profile.n_channels:
        raise GridMismatch("profiles disagree on channel count")
    if model_profile.thresholds.shape != measured_profile.thresholds.shape or np.any(
        model_profile.thresholds != measured_profile.thresholds
    ):
        raise GridMismatch("profiles were built on different threshold grids")
    length = max(model_profile.record_duration_s, measured_profile.record_duration_s)
    gap = np.abs(model_profile.duration_s - measured_profile.duration_s)
    return float(np.mean(gap) / length)


@dataclass(frozen=True)
class DamageReport:
    """Ratio of current to baseline deviation, with the trip decision."""

    baseline_discrepancy: float
    current_discrepancy: float
    index: float
    flagged: bool


def damage_index(baseline: float, current: float, trip_ratio: float = 2.0) -> DamageReport:
    """Deviation ratio against the initially calibrated model.

    ``index = current / max(baseline, 1e-9)``; the report is flagged when the
    index exceeds ``trip_ratio``.
    """
    if baseline < 0 or current < 0:
        raise ValueError("discrepancies must be nonnegative")
    if trip_ratio <= 1.0:
        raise ValueError("trip_ratio must exceed 1")
    index = current / max(baseline, 1e-9)
    return DamageReport(
        baseline_discrepancy=baseline,
        current_discrepancy=current,
        index=index,
        flagged=index > trip_ratio,
    )


@dataclass(frozen=True)
class AlertEvent:
    """One monitor window that crossed the amplitude or divergence bound."""

    window_start: int
    channels: tuple[int, ...]
    kl: float
    cause: str  # "threshold" | "divergence"


def _window_kl(
    m: ModalModel, window: np.ndarray, sample_rate_hz: float, prior_cov_scale: float
) -> float:
    """Residual divergence of one window against the calibrated model.

    Silent windows have nothing to diverge from and score zero. The response
    phase is unidentifiable inside an arbitrary window, so both orientations
    of the matched simulation are tried and the smaller divergence kept.
    """
    if float(np.max(np.abs(window))) == 0.0:
        return 0.0
    labels = tuple(f"ch{i + 1}" for i in range(window.shape[1]))
    ts = TimeSeriesSet(sample_rate_hz, labels, window)
    sim, _, _ = matched_response(m, ts)
    best = math.inf
    for oriented in (sim, sim.with_data(-sim.data)):
        stats = residual_stats(residual_series(oriented, ts))
        kl = gaussian_kl(GaussianSummary(stats.mean, stats.covariance), prior_cov_scale)
        best = min(best, kl)
    return best


def stream_monitor(
    m: ModalModel,
    sample_stream: Iterable,
    threshold: float,
    window_samples: int,
    *,
    sample_rate_hz: float,
    divergence_bound: float = math.inf,
    prior_cov_scale: float = 1.0,
) -> Iterator[AlertEvent]:
    """Monitor a sample stream window by window, yielding alert events.

    ``sample_stream`` yields one acceleration vector per instant, in arrival
    order. Each complete, non-overlapping window of ``window_samples`` emits
    at most one event: cause ``"threshold"`` when any channel magnitude
    exceeds ``threshold`` inside the window, else cause ``"divergence"`` when
    the window's residual divergence against the model exceeds
    ``divergence_bound``. Processing cost per window is independent of stream
    length; a trailing partial window is discarded. Normal exhaustion of the
    stream terminates the generator cleanly.
    """
    if window_samples < 2:
        raise ValueError("window_samples must be at least 2")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")

    buffer: list[np.ndarray] = []
    window_start = 0
    for row in sample_stream:
        sample = np.atleast_1d(np.asarray(row, dtype=float))
        buffer.append(sample)
        if len(buffer) < window_samples:
            continue
        window = np.vstack(buffer)
        buffer = []
        start = window_start
        window_start += window_samples

        exceeded = np.any(np.abs(window) > threshold, axis=0)
        channels = tuple(int(i) for i in np.nonzero(exceeded)[0])
        kl = _window_kl(m, window, sample_rate_hz, prior_cov_scale)
        if channels:
            yield AlertEvent(start, channels, kl, "threshold")
        elif kl > divergence_bound:
            yield AlertEvent(start, channels, kl, "divergence")
