"""End-to-end wiring: configuration, identification, and the damping sweep."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .alerts import AlertProfile, duration_curve
from .errors import ConfigError
from .infotheory import DampingCandidateResult, evaluate_candidate, select_damping_model
from .model import ModalModel, assemble_model, matched_response, scale_damping
from .signals import TimeSeriesSet
from .spectral import (
    DEFAULT_DAMPING_RATIO,
    SingularSpectrum,
    WelchConfig,
    modal_peaks,
    pick_peaks,
    svd_spectrum,
    welch_csd,
)


@dataclass(frozen=True)
class PeakConfig:
    min_prominence_rel: float = 0.1
    min_separation_hz: float = 0.5
    max_peaks: int = 10


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable knobs for the identify / select / alerts stages.

    ``welch_segment_length = None`` picks the largest power of two giving at
    least ~8 averages. ``alert_thresholds = None`` spreads
    ``alert_threshold_count`` points from zero to the measured record's global
    maximum.
    """

    welch_segment_length: Optional[int] = None
    welch_overlap_fraction: float = 0.5
    welch_window: str = "hann"
    peak: PeakConfig = field(default_factory=PeakConfig)
    scale_factors: tuple[float, ...] = (0.1, 1.0, 2.0, 4.0, 5.0)
    prior_cov_scale: float = 1.0
    alert_thresholds: Optional[tuple[float, ...]] = None
    alert_threshold_count: int = 41
    renyi_alpha: float = 2.0
    trip_ratio: float = 2.0
    fallback_damping_ratio: float = DEFAULT_DAMPING_RATIO

    def __post_init__(self) -> None:
        if not self.scale_factors:
            raise ConfigError("scale_factors must be non-empty")
        if any(s <= 0 for s in self.scale_factors):
            raise ConfigError("scale factors must be positive")
        if self.prior_cov_scale <= 0:
            raise ConfigError("prior_cov_scale must be positive")
        if self.renyi_alpha <= 0:
            raise ConfigError("renyi_alpha must be positive")
        if self.trip_ratio <= 1.0:
            raise ConfigError("trip_ratio must exceed 1")
        if self.alert_thresholds is not None:
            thr = self.alert_thresholds
            if len(thr) < 2 or any(b <= a for a, b in zip(thr, thr[1:])) or thr[0] < 0:
                raise ConfigError("explicit thresholds must be >= 0 and strictly ascending")
        if self.alert_threshold_count < 2:
            raise ConfigError("alert_threshold_count must be at least 2")
        if not 0.0 < self.fallback_damping_ratio < 1.0:
            raise ConfigError("fallback_damping_ratio must lie in (0, 1)")
        if self.welch_segment_length is not None:
            try:
                WelchConfig(self.welch_segment_length, self.welch_overlap_fraction, self.welch_window)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        else:
            try:
                WelchConfig(256, self.welch_overlap_fraction, self.welch_window)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "welch", "peak", "sweep", "prior_cov_scale", "alerts",
            "renyi_alpha", "trip_ratio", "fallback_damping_ratio",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict = {}
        try:
            welch = raw.get("welch", {})
            if welch:
                if "segment_length" in welch and welch["segment_length"] is not None:
                    kwargs["welch_segment_length"] = int(welch["segment_length"])
                if "overlap_fraction" in welch:
                    kwargs["welch_overlap_fraction"] = float(welch["overlap_fraction"])
                if "window" in welch:
                    kwargs["welch_window"] = str(welch["window"])
            peak = raw.get("peak", {})
            if peak:
                kwargs["peak"] = PeakConfig(
                    min_prominence_rel=float(peak.get("min_prominence_rel", 0.1)),
                    min_separation_hz=float(peak.get("min_separation_hz", 0.5)),
                    max_peaks=int(peak.get("max_peaks", 10)),
                )
            sweep = raw.get("sweep", {})
            if sweep:
                kwargs["scale_factors"] = tuple(float(s) for s in sweep["scale_factors"])
            if "prior_cov_scale" in raw:
                kwargs["prior_cov_scale"] = float(raw["prior_cov_scale"])
            alerts = raw.get("alerts", {})
            if alerts:
                if "thresholds" in alerts and alerts["thresholds"] is not None:
                    kwargs["alert_thresholds"] = tuple(float(t) for t in alerts["thresholds"])
                if "count" in alerts:
                    kwargs["alert_threshold_count"] = int(alerts["count"])
            if "renyi_alpha" in raw:
                kwargs["renyi_alpha"] = float(raw["renyi_alpha"])
            if "trip_ratio" in raw:
                kwargs["trip_ratio"] = float(raw["trip_ratio"])
            if "fallback_damping_ratio" in raw:
                kwargs["fallback_damping_ratio"] = float(raw["fallback_damping_ratio"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "PipelineConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def welch_config_for(self, n_samples: int) -> WelchConfig:
        if self.welch_segment_length is None:
            base = WelchConfig.default_for(n_samples)
            return WelchConfig(base.segment_length, self.welch_overlap_fraction, self.welch_window)
        return WelchConfig(self.welch_segment_length, self.welch_overlap_fraction, self.welch_window)


@dataclass(frozen=True)
class IdentificationResult:
    model: ModalModel
    spectrum: SingularSpectrum
    peak_bins: tuple[int, ...]


def identify(data: TimeSeriesSet, cfg: PipelineConfig | None = None) -> IdentificationResult:
    """Measured record -> modal model, via the frequency-domain decomposition."""
    cfg = cfg or PipelineConfig()
    csd = welch_csd(data, cfg.welch_config_for(data.n_samples))
    spectrum = svd_spectrum(csd)
    bins = pick_peaks(
        spectrum,
        cfg.peak.min_prominence_rel,
        cfg.peak.min_separation_hz,
        cfg.peak.max_peaks,
    )
    peaks = modal_peaks(spectrum, bins, cfg.fallback_damping_ratio)
    return IdentificationResult(assemble_model(peaks), spectrum, tuple(bins))


@dataclass(frozen=True)
class SweepResult:
    candidates: tuple[DampingCandidateResult, ...]
    selected_index: int
    prior_cov_scale: float
    responses: tuple[TimeSeriesSet, ...]


def run_sweep(
    base_model: ModalModel, measured: TimeSeriesSet, cfg: PipelineConfig | None = None
) -> SweepResult:
    """Evaluate every damping-scale candidate and select the divergence minimum."""
    cfg = cfg or PipelineConfig()
    candidates = []
    responses = []
    for factor in cfg.scale_factors:
        candidate = scale_damping(base_model, factor)
        candidates.append(
            evaluate_candidate(
                candidate,
                measured,
                prior_cov_scale=cfg.prior_cov_scale,
                renyi_alpha=cfg.renyi_alpha,
            )
        )
        sim, _, _ = matched_response(candidate, measured)
        responses.append(sim)
    return SweepResult(
        candidates=tuple(candidates),
        selected_index=select_damping_model(candidates),
        prior_cov_scale=cfg.prior_cov_scale,
        responses=tuple(responses),
    )


def threshold_grid(measured: TimeSeriesSet, cfg: PipelineConfig | None = None) -> np.ndarray:
    """Alert threshold grid: explicit from config, else 0 .. global maximum."""
    cfg = cfg or PipelineConfig()
    if cfg.alert_thresholds is not None:
        return np.asarray(cfg.alert_thresholds, dtype=float)
    top = float(np.max(np.abs(measured.data)))
    if top <= 0:
        top = 1.0
    return np.linspace(0.0, top, cfg.alert_threshold_count)


def alert_comparison(
    measured: TimeSeriesSet, model_response: TimeSeriesSet, cfg: PipelineConfig | None = None
) -> tuple[AlertProfile, AlertProfile, np.ndarray]:
    """Duration profiles of a measured record and a model response on a shared grid."""
    grid = threshold_grid(measured, cfg)
    return duration_curve(measured, grid), duration_curve(model_response, grid), grid
