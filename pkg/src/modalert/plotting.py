"""Figure rendering for the report paths.

Each CLI report command saves PNG figures next to its delimited output. The
Agg backend keeps rendering headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .alerts import AlertProfile
from .infotheory import DampingCandidateResult
from .signals import TimeSeriesSet
from .spectral import SingularSpectrum

_DPI = 150


def save_singular_spectrum(
    spec: SingularSpectrum, path: str | os.PathLike, peak_bins: tuple[int, ...] = ()
) -> None:
    """First singular values in dB over frequency, peaks annotated."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    floor = np.max(spec.singular_values) * 1e-30
    n_show = min(spec.singular_values.shape[1], 10)
    for j in range(n_show):
        db = 10.0 * np.log10(np.maximum(spec.singular_values[:, j], floor))
        ax.plot(
            spec.frequencies_hz,
            db,
            lw=1.4 if j == 0 else 0.6,
            alpha=1.0 if j == 0 else 0.45,
            label="singular value 1" if j == 0 else None,
        )
    if peak_bins:
        sv1 = spec.singular_values[:, 0]
        db1 = 10.0 * np.log10(np.maximum(sv1[list(peak_bins)], floor))
        ax.plot(spec.frequencies_hz[list(peak_bins)], db1, "rv", ms=7, label="picked peaks")
    ax.set_xlabel("Frequency (Hz)")
    ax.set_ylabel("Singular value (dB)")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_divergence_sweep(
    candidates: tuple[DampingCandidateResult, ...],
    selected_index: int,
    path: str | os.PathLike,
) -> None:
    """Divergence and comparison metrics versus the damping scale factor."""
    factors = [c.scale_factor for c in candidates]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    panels = (
        ("Kullback-Leibler (nats)", [c.kl_divergence for c in candidates]),
        ("Renyi entropy (nats)", [c.renyi_entropy for c in candidates]),
        ("Jensen-Shannon (nats)", [c.jensen_shannon for c in candidates]),
    )
    for ax, (title, values) in zip(axes, panels):
        ax.plot(factors, values, "o-")
        ax.axvline(factors[selected_index], color="r", ls="--", lw=1, alpha=0.7)
        ax.set_xlabel("Damping scale factor")
        ax.set_title(title, fontsize=10)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_response_overlay(
    measured: TimeSeriesSet,
    simulated: TimeSeriesSet,
    path: str | os.PathLike,
    channel: int | None = None,
) -> None:
    """Measured versus simulated time history on the reference channel."""
    if channel is None:
        channel = int(np.argmax(np.max(np.abs(measured.data), axis=0)))
    fig, ax = plt.subplots(figsize=(9, 3.6))
    ax.plot(measured.times(), measured.channel(channel), lw=0.8, label="measured")
    ax.plot(simulated.times(), simulated.channel(channel), lw=0.8, alpha=0.8, label="model")
    ax.set_xlabel("Time (s)")
    ax.set_ylabel(f"Acceleration (m/s$^2$), {measured.labels[channel]}")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_duration_curves(
    measured_profile: AlertProfile,
    model_profile: AlertProfile,
    path: str | os.PathLike,
) -> None:
    """Exceedance duration and trigger counts versus alert threshold."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(11, 3.8))
    thr = measured_profile.thresholds
    for c in range(measured_profile.n_channels):
        ax0.plot(thr, measured_profile.duration_s[:, c], "-", lw=0.9, alpha=0.7)
        ax0.plot(thr, model_profile.duration_s[:, c], "--", lw=0.9, alpha=0.7)
    ax0.set_xlabel("Alert threshold (m/s$^2$)")
    ax0.set_ylabel("Exceedance duration (s)")
    ax0.set_title("measured (solid) vs model (dashed)", fontsize=10)
    ax0.grid(True, alpha=0.3)
    ax1.step(thr, measured_profile.triggered_count, where="post", label="measured")
    ax1.step(thr, model_profile.triggered_count, where="post", label="model")
    ax1.set_xlabel("Alert threshold (m/s$^2$)")
    ax1.set_ylabel("Sensors triggered")
    ax1.legend(loc="upper right")
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
