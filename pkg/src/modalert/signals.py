"""Time-series containers, CSV ingestion, residual construction, and energy stats.

The CSV schema is ``t,<label1>,<label2>,...`` with column 1 holding time in
seconds (uniform, monotone increasing) and the remaining columns holding
acceleration in m/s^2. The sample rate is inferred from the time column.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChannelMismatch,
    EmptyRecord,
    InsufficientSamples,
    IrregularSampling,
    LengthMismatch,
    MalformedInput,
    RateMismatch,
)

# Maximum tolerated relative deviation of any time gap from the median gap.
GAP_TOLERANCE = 1e-3

# Relative tolerance when comparing sample rates of two records.
_RATE_RTOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeSeriesSet:
    """Uniformly sampled multi-channel acceleration record.

    ``data`` has shape ``(n_samples, n_channels)``; column ``j`` belongs to
    ``labels[j]``. Instances are immutable after construction.
    """

    sample_rate_hz: float
    labels: tuple[str, ...]
    data: np.ndarray
    t0_s: float = 0.0

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("data must be 2-D (n_samples, n_channels)")
        if data.shape[0] < 2:
            raise ValueError("record needs at least 2 samples per channel")
        if data.shape[1] < 1:
            raise ValueError("record needs at least 1 channel")
        if len(self.labels) != data.shape[1]:
            raise ValueError("one label per channel required")
        if not (math.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise ValueError("sample_rate_hz must be a positive finite number")
        if not np.all(np.isfinite(data)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "data", _readonly(data))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return self.t0_s + np.arange(self.n_samples) / self.sample_rate_hz

    def channel(self, index: int) -> np.ndarray:
        return self.data[:, index]

    def with_data(self, data: np.ndarray) -> "TimeSeriesSet":
        return TimeSeriesSet(self.sample_rate_hz, self.labels, data, self.t0_s)


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline=None)
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    if hasattr(source, "read"):  # binary stream
        return io.TextIOWrapper(source, encoding="utf-8")
    raise MalformedInput(f"unsupported source type: {type(source)!r}")


def load_timeseries(source) -> TimeSeriesSet:
    """Parse a CSV time-series file into a validated :class:`TimeSeriesSet`.

    ``source`` may be a path, bytes, or an open stream. Raises
    :class:`MalformedInput` for unparseable or non-finite cells,
    :class:`EmptyRecord` when fewer than two data rows are present, and
    :class:`IrregularSampling` when the time column is not uniform to 0.1%.
    """
    stream = _open_text(source)
    try:
        header = stream.readline()
        if not header.strip():
            raise EmptyRecord("missing header row")
        columns = [c.strip() for c in header.rstrip("\r\n").split(",")]
        if len(columns) < 2:
            raise MalformedInput("header must name a time column and at least one channel")
        labels = tuple(columns[1:])

        times: list[float] = []
        rows: list[list[float]] = []
        for lineno, line in enumerate(stream, start=2):
            if not line.strip():
                continue
            cells = line.rstrip("\r\n").split(",")
            if len(cells) != len(columns):
                raise MalformedInput(f"line {lineno}: expected {len(columns)} cells, got {len(cells)}")
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                raise MalformedInput(f"line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in values):
                raise MalformedInput(f"line {lineno}: non-finite value")
            times.append(values[0])
            rows.append(values[1:])
    finally:
        if stream is not source:
            stream.close()

    if len(rows) < 2:
        raise EmptyRecord(f"need at least 2 data rows, got {len(rows)}")

    t = np.asarray(times)
    gaps = np.diff(t)
    median_gap = float(np.median(gaps))
    if median_gap <= 0:
        raise IrregularSampling("time column is not increasing")
    if np.any(np.abs(gaps - median_gap) > GAP_TOLERANCE * median_gap):
        worst = int(np.argmax(np.abs(gaps - median_gap)))
        raise IrregularSampling(
            f"gap at row {worst + 2} deviates more than 0.1% from the median spacing"
        )

    return TimeSeriesSet(
        sample_rate_hz=1.0 / median_gap,
        labels=labels,
        data=np.asarray(rows),
        t0_s=float(t[0]),
    )


def signal_energy(samples) -> float:
    """Sum of squared samples. Empty input has zero energy.

    Accepts any array shape; multi-channel arrays are summed over all entries.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.sum(arr * arr))


def residual_series(model: TimeSeriesSet, measured: TimeSeriesSet) -> TimeSeriesSet:
    """Per-channel difference ``model - measured``, channel order preserved.

    Lengths may differ by at most one sample (the longer record is truncated);
    larger gaps are rejected rather than resampled.
    """
    if model.n_channels != measured.n_channels:
        raise ChannelMismatch(
            f"model has {model.n_channels} channels, measured has {measured.n_channels}"
        )
    if not math.isclose(model.sample_rate_hz, measured.sample_rate_hz, rel_tol=_RATE_RTOL):
        raise RateMismatch(
            f"model at {model.sample_rate_hz} Hz, measured at {measured.sample_rate_hz} Hz"
        )
    if abs(model.n_samples - measured.n_samples) > 1:
        raise LengthMismatch(
            f"lengths {model.n_samples} and {measured.n_samples} differ by more than one sample"
        )
    n = min(model.n_samples, measured.n_samples)
    diff = model.data[:n] - measured.data[:n]
    return TimeSeriesSet(measured.sample_rate_hz, measured.labels, diff, measured.t0_s)


@dataclass(frozen=True)
class ResidualStats:
    """Pooled statistics of a multi-channel residual record.

    ``covariance`` is the unbiased sample covariance of the channel vector
    across time; ``pooled_std`` is the root mean square over every sample of
    every channel; ``energy`` is the total sum of squares.
    """

    mean: np.ndarray
    covariance: np.ndarray
    std_per_channel: np.ndarray
    pooled_std: float
    energy: float
    n_samples: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", _readonly(self.mean))
        object.__setattr__(self, "covariance", _readonly(self.covariance))
        object.__setattr__(self, "std_per_channel", _readonly(self.std_per_channel))


def residual_stats(residual: TimeSeriesSet) -> ResidualStats:
    """Mean, covariance, spread, and energy of a residual record."""
    n = residual.n_samples
    if n < 2:
        raise InsufficientSamples("need at least 2 samples for residual statistics")
    data = residual.data
    mean = data.mean(axis=0)
    cov = np.atleast_2d(np.cov(data, rowvar=False, ddof=1))
    cov = 0.5 * (cov + cov.T)
    return ResidualStats(
        mean=mean,
        covariance=cov,
        std_per_channel=np.sqrt(np.clip(np.diag(cov), 0.0, None)),
        pooled_std=float(np.sqrt(np.sum(data * data) / data.size)),
        energy=signal_energy(data),
        n_samples=n,
    )
