"""Output-only spectral estimation and frequency-domain decomposition.

The cross-spectral density matrix is estimated directly from the measured
outputs with Welch averaging, decomposed bin by bin with an SVD, and mined
for modal parameters: peak frequencies from the first singular value curve,
mode shapes from the corresponding singular vectors, and damping ratios from
the half-power bandwidth around each peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, get_window

from .errors import BandwidthUnresolved, NoPeaksFound, RecordTooShort
from .signals import TimeSeriesSet

# Fallback modal damping ratio when the half-power bandwidth cannot be
# resolved on the spectral grid. Typical of lightly damped frames.
DEFAULT_DAMPING_RATIO = 0.013

_WINDOWS = ("hann", "rectangular")


@dataclass(frozen=True)
class WelchConfig:
    """Segment-averaging settings for the cross-spectral estimate."""

    segment_length: int
    overlap_fraction: float = 0.5
    window: str = "hann"

    def __post_init__(self) -> None:
        n = self.segment_length
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError("segment_length must be a power of two >= 2")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must lie in [0, 1)")
        if self.window not in _WINDOWS:
            raise ValueError(f"window must be one of {_WINDOWS}")

    @classmethod
    def default_for(cls, n_samples: int) -> "WelchConfig":
        """Largest power-of-two segment giving at least ~8 averages."""
        if n_samples < 4:
            raise ValueError("record too short for spectral estimation")
        target = max(4, n_samples // 8)
        seg = 1 << (target.bit_length() - 1)
        return cls(segment_length=min(seg, 1 << (n_samples.bit_length() - 1)))


@dataclass(frozen=True)
class CrossSpectralDensity:
    """Hermitian spectral matrix per frequency bin, units (m/s^2)^2/Hz.

    Frequencies span ``(0, sample_rate/2]``; the DC bin is dropped at
    estimation time.
    """

    frequencies_hz: np.ndarray
    matrices: np.ndarray
    welch_config: WelchConfig

    def __post_init__(self) -> None:
        freqs = np.asarray(self.frequencies_hz, dtype=float)
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrices must have shape (n_freqs, n_ch, n_ch)")
        if freqs.shape[0] != mats.shape[0]:
            raise ValueError("one matrix per frequency bin required")
        if freqs.size and freqs[0] <= 0:
            raise ValueError("frequency axis must start above DC")
        herm_err = np.max(np.abs(mats - mats.conj().transpose(0, 2, 1)))
        scale = max(np.max(np.abs(mats)), 1e-300)
        if herm_err > 1e-8 * scale:
            raise ValueError("spectral matrices are not Hermitian within tolerance")
        freqs.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "frequencies_hz", freqs)
        object.__setattr__(self, "matrices", mats)

    @property
    def n_channels(self) -> int:
        return self.matrices.shape[1]

    @property
    def delta_f(self) -> float:
        if self.frequencies_hz.size < 2:
            return float(self.frequencies_hz[0])
        return float(self.frequencies_hz[1] - self.frequencies_hz[0])


def welch_csd(data: TimeSeriesSet, cfg: WelchConfig | None = None) -> CrossSpectralDensity:
    """Averaged windowed cross-periodogram matrix of a multi-channel record.

    One-sided density scaling: summing an auto-spectrum times the bin width
    recovers the channel mean square power (up to window leakage). Hermitian
    symmetry is enforced exactly by averaging each matrix with its conjugate
    transpose.
    """
    if cfg is None:
        cfg = WelchConfig.default_for(data.n_samples)
    seg = cfg.segment_length
    if data.n_samples < seg:
        raise RecordTooShort(f"record has {data.n_samples} samples, segment needs {seg}")

    if cfg.window == "hann":
        win = get_window("hann", seg)  # periodic, standard for averaging
    else:
        win = np.ones(seg)
    step = max(1, int(round(seg * (1.0 - cfg.overlap_fraction))))
    starts = range(0, data.n_samples - seg + 1, step)

    fs = data.sample_rate_hz
    n_bins = seg // 2 + 1
    n_ch = data.n_channels
    acc = np.zeros((n_bins, n_ch, n_ch), dtype=complex)
    n_segments = 0
    for start in starts:
        block = data.data[start : start + seg] * win[:, None]
        spec = np.fft.rfft(block, axis=0)
        acc += spec[:, :, None] * spec[:, None, :].conj()
        n_segments += 1

    acc /= n_segments * fs * float(np.sum(win * win))
    acc[1:-1] *= 2.0  # one-sided: interior bins carry both spectral halves

    freqs = np.fft.rfftfreq(seg, d=1.0 / fs)[1:]
    mats = acc[1:]
    mats = 0.5 * (mats + mats.conj().transpose(0, 2, 1))
    return CrossSpectralDensity(freqs, mats, cfg)


@dataclass(frozen=True)
class SingularSpectrum:
    """Per-frequency singular values and first singular vectors of the CSD."""

    frequencies_hz: np.ndarray
    singular_values: np.ndarray
    first_singular_vectors: np.ndarray

    def __post_init__(self) -> None:
        freqs = np.asarray(self.frequencies_hz, dtype=float)
        svals = np.asarray(self.singular_values, dtype=float)
        vecs = np.asarray(self.first_singular_vectors, dtype=complex)
        if svals.ndim != 2 or svals.shape[0] != freqs.shape[0]:
            raise ValueError("singular_values must have shape (n_freqs, n_ch)")
        if np.any(np.diff(svals, axis=1) > 1e-12 * np.abs(svals[:, :1])):
            raise ValueError("singular values must be sorted descending")
        if np.any(svals < -1e-300):
            raise ValueError("singular values must be nonnegative")
        norms = np.linalg.norm(vecs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("first singular vectors must have unit norm")
        for arr in (freqs, svals, vecs):
            arr.setflags(write=False)
        object.__setattr__(self, "frequencies_hz", freqs)
        object.__setattr__(self, "singular_values", svals)
        object.__setattr__(self, "first_singular_vectors", vecs)

    @property
    def delta_f(self) -> float:
        if self.frequencies_hz.size < 2:
            return float(self.frequencies_hz[0])
        return float(self.frequencies_hz[1] - self.frequencies_hz[0])


def svd_spectrum(csd: CrossSpectralDensity) -> SingularSpectrum:
    """Singular value decomposition of the spectral matrix at every bin.

    For Hermitian positive-semidefinite input the singular values coincide
    with the eigenvalues and the first singular vector spans the dominant
    response direction at that frequency.
    """
    u, s, _ = np.linalg.svd(csd.matrices)
    vecs = u[:, :, 0]
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = vecs / np.where(norms > 0, norms, 1.0)
    return SingularSpectrum(csd.frequencies_hz, s, vecs)


def pick_peaks(
    spec: SingularSpectrum,
    min_prominence_rel: float,
    min_separation_hz: float,
    max_peaks: int,
) -> list[int]:
    """Bin indices of dominant local maxima of the first singular value.

    Peaks are found on a decibel scale with prominence at least
    ``min_prominence_rel`` times the dynamic range (max minus median, in dB),
    kept mutually separated by ``min_separation_hz`` (taller peaks win), capped
    at ``max_peaks``, and returned in ascending frequency order. The DC and
    Nyquist bins never qualify.
    """
    if not 0.0 < min_prominence_rel <= 1.0:
        raise ValueError("min_prominence_rel must lie in (0, 1]")
    if min_separation_hz < spec.delta_f:
        raise ValueError("min_separation_hz must be at least one bin width")
    if max_peaks < 1:
        raise ValueError("max_peaks must be positive")

    sv1 = spec.singular_values[:, 0]
    top = float(np.max(sv1))
    if top <= 0:
        raise NoPeaksFound("first singular value curve is identically zero")
    db = 10.0 * np.log10(np.maximum(sv1, top * 1e-30))
    dynamic = float(np.max(db) - np.median(db))
    if dynamic <= 0:
        raise NoPeaksFound("spectrum is flat")

    candidates, _ = find_peaks(db, prominence=min_prominence_rel * dynamic)
    candidates = candidates[candidates < len(sv1) - 1]  # drop the Nyquist bin
    if candidates.size == 0:
        raise NoPeaksFound("no local maxima with sufficient prominence")

    freqs = spec.frequencies_hz
    order = candidates[np.argsort(db[candidates])[::-1]]
    kept: list[int] = []
    for idx in order:
        if len(kept) == max_peaks:
            break
        if all(abs(freqs[idx] - freqs[j]) >= min_separation_hz for j in kept):
            kept.append(int(idx))
    if not kept:
        raise NoPeaksFound("separation constraint removed every candidate")
    return sorted(kept)


def extract_mode_shape(spec: SingularSpectrum, bin_index: int) -> np.ndarray:
    """First singular vector at a picked bin, phase-normalized to unit norm.

    The first entry with magnitude above 1e-12 is rotated onto the nonnegative
    real axis so shapes are comparable across runs.
    """
    vec = np.array(spec.first_singular_vectors[bin_index], dtype=complex)
    significant = np.nonzero(np.abs(vec) > 1e-12)[0]
    if significant.size:
        vec = vec * np.exp(-1j * np.angle(vec[significant[0]]))
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec = vec / norm
    return vec


def _interp_crossing(freqs: np.ndarray, db: np.ndarray, i_above: int, i_below: int, level: float) -> float:
    """Frequency where the dB curve crosses ``level`` between two bins."""
    d0, d1 = db[i_above], db[i_below]
    if d0 == d1:
        return float(freqs[i_below])
    frac = (d0 - level) / (d0 - d1)
    return float(freqs[i_above] + frac * (freqs[i_below] - freqs[i_above]))


def _half_power_crossing(
    freqs: np.ndarray, db: np.ndarray, bin_index: int, level: float, direction: int
) -> float | None:
    """Crossing of ``level`` on one side of a peak, or None when unresolved.

    A crossing is unresolved when the walk reaches the basin boundary (curve
    rising again, or spectrum edge) without dipping to the level, and also
    when the interpolated crossing lies within half a bin of the peak center:
    then the half-power band is narrower than one bin and the grid cannot
    resolve it.
    """
    df = abs(freqs[1] - freqs[0]) if len(freqs) > 1 else freqs[0]
    prev = db[bin_index]
    j = bin_index + direction
    while 0 <= j < len(db):
        if db[j] > prev:  # basin boundary: curve rising again
            return None
        if db[j] <= level:
            crossing = _interp_crossing(freqs, db, j - direction, j, level)
            if abs(crossing - freqs[bin_index]) < 0.5 * df:
                return None  # narrower than one bin
            return crossing
        prev = db[j]
        j += direction
    return None


def estimate_damping(spec: SingularSpectrum, bin_index: int) -> float:
    """Half-power bandwidth damping ratio at a picked peak.

    Searches left and right of the peak for the -3 dB crossings of the first
    singular value, interpolating linearly in dB, and returns
    ``(f2 - f1) / (2 * f_peak)`` clamped to ``[1e-4, 0.5]``. Raises
    :class:`BandwidthUnresolved` when a crossing is not found before the local
    basin boundary or falls inside a single bin gap.
    """
    sv1 = spec.singular_values[:, 0]
    freqs = spec.frequencies_hz
    peak = float(sv1[bin_index])
    if peak <= 0:
        raise BandwidthUnresolved("peak has no power")
    db = 10.0 * np.log10(np.maximum(sv1, peak * 1e-30))
    level = db[bin_index] - 3.0

    f_lo = _half_power_crossing(freqs, db, bin_index, level, -1)
    f_hi = _half_power_crossing(freqs, db, bin_index, level, +1)
    if f_lo is None or f_hi is None:
        raise BandwidthUnresolved(
            f"half-power crossing missing around bin {bin_index} ({freqs[bin_index]:.4g} Hz)"
        )
    zeta = (f_hi - f_lo) / (2.0 * freqs[bin_index])
    return float(min(max(zeta, 1e-4), 0.5))


@dataclass(frozen=True)
class ModePeak:
    """One identified mode: frequency, damping, shape, and peak strength."""

    frequency_hz: float
    bin_index: int
    damping_ratio: float
    mode_shape: np.ndarray
    sv1_at_peak: float

    def __post_init__(self) -> None:
        if not 0.0 < self.damping_ratio < 1.0:
            raise ValueError("damping_ratio must lie in (0, 1)")
        if self.frequency_hz <= 0 or self.sv1_at_peak <= 0:
            raise ValueError("frequency and peak strength must be positive")
        shape = np.asarray(self.mode_shape, dtype=complex)
        if abs(np.linalg.norm(shape) - 1.0) > 1e-8:
            raise ValueError("mode shape must have unit norm")
        shape.setflags(write=False)
        object.__setattr__(self, "mode_shape", shape)


def _refine_peak_frequency(spec: SingularSpectrum, bin_index: int) -> float:
    """Sub-bin peak frequency via a parabola through the dB values.

    Quantizing peak frequencies to bin centers leaves up to half a bin of
    error, enough to dephase a long simulated decay; the standard log-domain
    three-point fit removes most of it.
    """
    sv1 = spec.singular_values[:, 0]
    freqs = spec.frequencies_hz
    if bin_index <= 0 or bin_index >= len(sv1) - 1:
        return float(freqs[bin_index])
    floor = float(np.max(sv1)) * 1e-30
    d = 10.0 * np.log10(np.maximum(sv1[bin_index - 1 : bin_index + 2], floor))
    denom = d[0] - 2.0 * d[1] + d[2]
    if denom >= 0:
        return float(freqs[bin_index])
    delta = 0.5 * (d[0] - d[2]) / denom
    delta = min(max(delta, -0.5), 0.5)
    return float(freqs[bin_index] + delta * spec.delta_f)


def modal_peaks(
    spec: SingularSpectrum,
    bins: list[int],
    fallback_damping_ratio: float = DEFAULT_DAMPING_RATIO,
) -> list[ModePeak]:
    """Assemble :class:`ModePeak` records for picked bins.

    Peak frequencies are refined sub-bin by parabolic interpolation; the
    damping ratio falls back to ``fallback_damping_ratio`` whenever the
    half-power bandwidth cannot be resolved on the grid.
    """
    peaks = []
    for b in bins:
        try:
            zeta = estimate_damping(spec, b)
        except BandwidthUnresolved:
            zeta = fallback_damping_ratio
        peaks.append(
            ModePeak(
                frequency_hz=_refine_peak_frequency(spec, b),
                bin_index=int(b),
                damping_ratio=zeta,
                mode_shape=extract_mode_shape(spec, b),
                sv1_at_peak=float(spec.singular_values[b, 0]),
            )
        )
    return peaks


def mac(shape_a, shape_b) -> float:
    """Modal assurance criterion between two (possibly complex) shapes."""
    a = np.asarray(shape_a, dtype=complex).ravel()
    b = np.asarray(shape_b, dtype=complex).ravel()
    denom = float(np.real(np.vdot(a, a)) * np.real(np.vdot(b, b)))
    if denom <= 0:
        return 0.0
    return float(abs(np.vdot(a, b)) ** 2 / denom)
