"""Modal-superposition response model with uniform damping scaling.

The model carries the modes identified from measured data. Candidate damping
models are produced by scaling every modal damping ratio with one dimensionless
factor; the simulated response is an impulse-type free decay (cosine phase at
onset) whose amplitude is matched to the measured record's global peak.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssemblyConflict,
    ChannelMismatch,
    EmptyModeSet,
    NyquistViolation,
    OverdampedModel,
    RateMismatch,
    ZeroSimulation,
)
from .signals import TimeSeriesSet
from .spectral import ModePeak

_RATE_RTOL = 1e-9


@dataclass(frozen=True)
class Mode:
    """One vibration mode: frequency (Hz), damping ratio, shape, amplitude."""

    frequency_hz: float
    damping_ratio: float
    shape: np.ndarray
    modal_amplitude: float

    def __post_init__(self) -> None:
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be positive")
        if not 0.0 < self.damping_ratio < 1.0:
            raise ValueError("damping_ratio must lie in (0, 1)")
        if self.modal_amplitude < 0:
            raise ValueError("modal_amplitude must be nonnegative")
        shape = np.asarray(self.shape, dtype=complex)
        if shape.ndim != 1:
            raise ValueError("shape must be a vector")
        if abs(np.linalg.norm(shape) - 1.0) > 1e-8:
            raise ValueError("shape must have unit 2-norm")
        shape.setflags(write=False)
        object.__setattr__(self, "shape", shape)


@dataclass(frozen=True)
class ModalModel:
    """Identified modal model plus the damping scale and global gain.

    ``damping_scale`` multiplies every modal damping ratio and is absolute
    (not cumulative across rescalings). ``global_gain`` is set by amplitude
    matching against a measured record.
    """

    modes: tuple[Mode, ...]
    n_channels: int
    damping_scale: float = 1.0
    global_gain: float = 1.0

    def __post_init__(self) -> None:
        if not self.modes:
            raise EmptyModeSet("a modal model needs at least one mode")
        object.__setattr__(self, "modes", tuple(self.modes))
        freqs = [m.frequency_hz for m in self.modes]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise AssemblyConflict("mode frequencies must be strictly ascending")
        for m in self.modes:
            if len(m.shape) != self.n_channels:
                raise ChannelMismatch("every shape must have n_channels entries")
        if self.damping_scale <= 0:
            raise ValueError("damping_scale must be positive")
        if self.global_gain <= 0:
            raise ValueError("global_gain must be positive")
        if any(self.damping_scale * m.damping_ratio >= 1.0 for m in self.modes):
            raise OverdampedModel(
                f"damping_scale {self.damping_scale} pushes an effective ratio to 1 or above"
            )

    @property
    def frequencies_hz(self) -> np.ndarray:
        return np.array([m.frequency_hz for m in self.modes])

    @property
    def effective_damping_ratios(self) -> np.ndarray:
        return self.damping_scale * np.array([m.damping_ratio for m in self.modes])

    @property
    def max_frequency_hz(self) -> float:
        return self.modes[-1].frequency_hz


def assemble_model(peaks: list[ModePeak]) -> ModalModel:
    """Build a unit-scale model from identified spectral peaks.

    Modal amplitudes are the square roots of the first singular value at each
    peak, normalized so the largest is one.
    """
    if not peaks:
        raise EmptyModeSet("no peaks to assemble")
    n_channels = len(peaks[0].mode_shape)
    if any(len(p.mode_shape) != n_channels for p in peaks):
        raise ChannelMismatch("peaks disagree on channel count")
    ordered = sorted(peaks, key=lambda p: p.frequency_hz)
    amps = np.sqrt([p.sv1_at_peak for p in ordered])
    amps = amps / amps.max()
    modes = tuple(
        Mode(
            frequency_hz=p.frequency_hz,
            damping_ratio=p.damping_ratio,
            shape=p.mode_shape,
            modal_amplitude=float(a),
        )
        for p, a in zip(ordered, amps)
    )
    return ModalModel(modes=modes, n_channels=n_channels)


def scale_damping(m: ModalModel, factor: float) -> ModalModel:
    """Copy of the model with ``damping_scale`` set to ``factor``.

    The factor is absolute: rescaling an already scaled model replaces the
    previous factor instead of compounding it.
    """
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return dataclasses.replace(m, damping_scale=factor)


def simulate_response(
    m: ModalModel, n_samples: int, sample_rate_hz: float, onset_index: int
) -> TimeSeriesSet:
    """Impulse-type free-decay acceleration response of the model.

    All modes start in cosine phase at the onset sample; samples before the
    onset are zero. For channel ``s`` and elapsed time ``tau`` past onset::

        a_s = gain * sum_r Re(shape_r[s]) * amp_r
                   * exp(-zeta'_r * w_r * tau) * cos(w_d_r * tau)

    with ``zeta'_r`` the scaled damping ratio and ``w_d_r`` the damped
    circular frequency.
    """
    if sample_rate_hz <= 2.0 * m.max_frequency_hz:
        raise NyquistViolation(
            f"sample rate {sample_rate_hz} Hz cannot represent {m.max_frequency_hz} Hz"
        )
    if not 0 <= onset_index < n_samples:
        raise ValueError("onset_index must lie inside the record")

    omega = 2.0 * math.pi * m.frequencies_hz
    zeta = m.effective_damping_ratios
    omega_d = omega * np.sqrt(1.0 - zeta**2)
    weights = np.array([mode.modal_amplitude * np.real(mode.shape) for mode in m.modes])

    tau = np.arange(n_samples - onset_index) / sample_rate_hz
    decay = np.exp(-np.outer(tau, zeta * omega)) * np.cos(np.outer(tau, omega_d))
    data = np.zeros((n_samples, m.n_channels))
    data[onset_index:] = m.global_gain * (decay @ weights)

    labels = tuple(f"ch{i + 1}" for i in range(m.n_channels))
    return TimeSeriesSet(sample_rate_hz, labels, data, t0_s=0.0)


def align_onset(sim_template: TimeSeriesSet, measured: TimeSeriesSet) -> int:
    """Onset sample for the simulation: the measured record's global peak.

    The reference channel is the one with the largest peak amplitude; ties
    break to the earliest index (and lowest channel).
    """
    if not math.isclose(
        sim_template.sample_rate_hz, measured.sample_rate_hz, rel_tol=_RATE_RTOL
    ):
        raise RateMismatch("template and measured record sample rates differ")
    magnitude = np.abs(measured.data)
    reference = int(np.argmax(magnitude.max(axis=0)))
    return int(np.argmax(magnitude[:, reference]))


def amplitude_match(
    sim: TimeSeriesSet, measured: TimeSeriesSet
) -> tuple[TimeSeriesSet, float]:
    """Scale the simulation so its global peak equals the measured peak.

    Returns the scaled series and the gain applied.
    """
    if sim.n_channels != measured.n_channels:
        raise ChannelMismatch("simulation and measurement channel counts differ")
    if not math.isclose(sim.sample_rate_hz, measured.sample_rate_hz, rel_tol=_RATE_RTOL):
        raise RateMismatch("simulation and measurement sample rates differ")
    sim_peak = float(np.max(np.abs(sim.data)))
    if sim_peak == 0.0:
        raise ZeroSimulation("cannot amplitude-match an identically zero simulation")
    gain = float(np.max(np.abs(measured.data))) / sim_peak
    return sim.with_data(sim.data * gain), gain


def matched_response(m: ModalModel, measured: TimeSeriesSet) -> tuple[TimeSeriesSet, int, float]:
    """Simulate the model against a measured record: align onset, match peak.

    Returns (scaled simulation, onset index, gain).
    """
    template = simulate_response(m, measured.n_samples, measured.sample_rate_hz, 0)
    onset = align_onset(template, measured)
    sim = simulate_response(m, measured.n_samples, measured.sample_rate_hz, onset)
    scaled, gain = amplitude_match(sim, measured)
    return scaled, onset, gain
