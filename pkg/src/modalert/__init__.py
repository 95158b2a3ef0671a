"""Output-only structural system identification and vibration alert analytics.

Pipeline: estimate the cross-spectral matrix of a multi-channel acceleration
record, decompose it per frequency, pick modal peaks, assemble a modal model,
sweep damping-scale candidates, select the one whose residual diverges least
from a Gaussian reference prior, and score alert-duration fidelity and
baseline deviation for monitoring.
"""

__version__ = "0.1.0"

from . import errors
from .alerts import (
    AlertEvent,
    AlertProfile,
    DamageReport,
    damage_index,
    duration_curve,
    duration_discrepancy,
    exceedance_duration,
    stream_monitor,
)
from .infotheory import (
    DampingCandidateResult,
    GaussianSummary,
    evaluate_candidate,
    gaussian_kl,
    jensen_shannon,
    kl_discrete,
    renyi_entropy,
    select_damping_model,
    shannon_entropy,
)
from .model import (
    ModalModel,
    Mode,
    align_onset,
    amplitude_match,
    assemble_model,
    matched_response,
    scale_damping,
    simulate_response,
)
from .oracle import (
    Excitation,
    ExactMode,
    SyntheticSystem,
    exact_modes,
    integrate_response,
    newmark_states,
    perturb_stiffness,
    shear_building,
)
from .pipeline import (
    IdentificationResult,
    PipelineConfig,
    SweepResult,
    identify,
    run_sweep,
    threshold_grid,
)
from .signals import (
    ResidualStats,
    TimeSeriesSet,
    load_timeseries,
    residual_series,
    residual_stats,
    signal_energy,
)
from .spectral import (
    CrossSpectralDensity,
    ModePeak,
    SingularSpectrum,
    WelchConfig,
    estimate_damping,
    extract_mode_shape,
    mac,
    modal_peaks,
    pick_peaks,
    svd_spectrum,
    welch_csd,
)

__all__ = [
    "__version__",
    "errors",
    # signals
    "TimeSeriesSet", "ResidualStats", "load_timeseries", "signal_energy",
    "residual_series", "residual_stats",
    # spectral
    "WelchConfig", "CrossSpectralDensity", "SingularSpectrum", "ModePeak",
    "welch_csd", "svd_spectrum", "pick_peaks", "extract_mode_shape",
    "estimate_damping", "modal_peaks", "mac",
    # model
    "Mode", "ModalModel", "assemble_model", "scale_damping", "simulate_response",
    "align_onset", "amplitude_match", "matched_response",
    # infotheory
    "GaussianSummary", "DampingCandidateResult", "shannon_entropy", "kl_discrete",
    "gaussian_kl", "renyi_entropy", "jensen_shannon", "evaluate_candidate",
    "select_damping_model",
    # alerts
    "AlertProfile", "AlertEvent", "DamageReport", "exceedance_duration",
    "duration_curve", "duration_discrepancy", "damage_index", "stream_monitor",
    # oracle
    "SyntheticSystem", "ExactMode", "Excitation", "shear_building", "exact_modes",
    "integrate_response", "newmark_states", "perturb_stiffness",
    # pipeline
    "PipelineConfig", "IdentificationResult", "SweepResult", "identify",
    "run_sweep", "threshold_grid",
]
