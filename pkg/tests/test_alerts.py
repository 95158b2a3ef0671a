"""Exceedance durations, alert profiles, damage index, and the stream monitor."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import modalert as ma
from modalert.errors import GridMismatch, UnsortedThresholds
from conftest import impact_record, modal_damping_system, oriented, sdof_system


def _ts(data, fs=100.0):
    arr = np.atleast_2d(np.asarray(data, dtype=float))
    if arr.shape[0] == 1:
        arr = arr.T
    return ma.TimeSeriesSet(fs, tuple(f"c{i}" for i in range(arr.shape[1])), arr)


# --- exceedance_duration -----------------------------------------------------

def test_exceedance_single_sample():
    assert ma.exceedance_duration([0, 1, 2, 1, 0], 1.0, 1.5) == pytest.approx(1.0)


def test_exceedance_above_max_is_zero():
    assert ma.exceedance_duration([0.5, -1.0, 0.2], 10.0, 2.0) == 0.0


def test_exceedance_zero_threshold_full_duration():
    x = np.array([0.1, -0.4, 2.0, -0.2])
    assert ma.exceedance_duration(x, 2.0, 0.0) == pytest.approx(2.0)


def test_exceedance_strict_inequality():
    assert ma.exceedance_duration([1.0, 1.0, 2.0], 1.0, 1.0) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 50.0))
def test_exceedance_scale_covariance(seed, c):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=64)
    thr = float(rng.uniform(0.0, 2.0))
    assert ma.exceedance_duration(c * x, 8.0, c * thr) == pytest.approx(
        ma.exceedance_duration(x, 8.0, thr)
    )


# --- duration_curve ----------------------------------------------------------

def test_curve_zero_signal():
    profile = ma.duration_curve(_ts(np.zeros(50)), np.array([0.0, 1.0, 2.0]))
    assert np.all(profile.duration_s == 0.0)
    assert np.all(profile.triggered_count == 0)


def test_curve_monotone_on_impact_record():
    sys_ = sdof_system(3.0, 0.026)
    rec = impact_record(sys_, 200.0, 10.0, 0.5 / 3.0, 4e5, 1.0, seed=2)
    grid = np.linspace(0.0, float(np.abs(rec.data).max()), 41)
    profile = ma.duration_curve(rec, grid)
    assert np.all(np.diff(profile.duration_s, axis=0) <= 1e-12)
    assert np.all(np.diff(profile.triggered_count) <= 0)
    assert np.all(profile.duration_s <= rec.duration_s + 1e-12)


def test_curve_unsorted_threshold_grid():
    with pytest.raises(UnsortedThresholds):
        ma.duration_curve(_ts(np.ones(10)), np.array([1.0, 0.5]))
    with pytest.raises(UnsortedThresholds):
        ma.duration_curve(_ts(np.ones(10)), np.array([0.5]))


def test_curve_all_triggered_threshold(twelve_sensor_map):
    sys_ = ma.shear_building(
        4, 1000.0, 2e6, rayleigh_a0=0.3, rayleigh_a1=2.2e-4, sensor_map=twelve_sensor_map
    )
    rec = impact_record(sys_, 256.0, 8.0, 0.2, 4e5, 1.0, seed=4)
    grid = np.linspace(0.0, float(np.abs(rec.data).max()), 41)
    profile = ma.duration_curve(rec, grid)
    # direct scan: largest threshold at which every sensor still triggers
    per_channel_max = np.abs(rec.data).max(axis=0)
    expected = per_channel_max.min()
    fully_triggered = grid[profile.triggered_count == 12]
    assert fully_triggered.size > 0
    assert fully_triggered.max() < expected
    assert profile.triggered_count[0] == 12


# --- duration_discrepancy ----------------------------------------------------

def test_discrepancy_identical_profiles():
    rng = np.random.default_rng(0)
    rec = _ts(rng.normal(size=128))
    grid = np.linspace(0.0, 3.0, 10)
    p = ma.duration_curve(rec, grid)
    assert ma.duration_discrepancy(p, p) == 0.0


def test_discrepancy_maximal_case():
    grid = np.array([0.0, 1.0, 2.0])
    full = ma.duration_curve(_ts(np.full(40, 5.0)), grid)  # above every threshold
    silent = ma.duration_curve(_ts(np.zeros(40)), grid)
    assert ma.duration_discrepancy(silent, full) == pytest.approx(1.0)


def test_discrepancy_grid_mismatch():
    rec = _ts(np.ones(16))
    a = ma.duration_curve(rec, np.array([0.0, 1.0]))
    b = ma.duration_curve(rec, np.array([0.0, 2.0]))
    with pytest.raises(GridMismatch):
        ma.duration_discrepancy(a, b)


def test_discrepancy_symmetric_pseudometric():
    rng = np.random.default_rng(8)
    grid = np.linspace(0.0, 2.0, 8)
    a = ma.duration_curve(_ts(rng.normal(size=100)), grid)
    b = ma.duration_curve(_ts(rng.normal(size=100)), grid)
    assert ma.duration_discrepancy(a, b) == pytest.approx(ma.duration_discrepancy(b, a))
    assert ma.duration_discrepancy(a, b) >= 0.0


# --- damage_index ------------------------------------------------------------

def test_damage_index_identity_not_flagged():
    report = ma.damage_index(0.02, 0.02, trip_ratio=2.0)
    assert report.index == pytest.approx(1.0)
    assert not report.flagged


def test_damage_index_arithmetic():
    report = ma.damage_index(0.01, 0.05, trip_ratio=2.0)
    assert report.index == pytest.approx(5.0)
    assert report.flagged


def test_damage_index_monotone_in_current():
    indices = [ma.damage_index(0.02, c).index for c in (0.0, 0.01, 0.02, 0.05, 0.2)]
    assert all(a < b for a, b in zip(indices, indices[1:]))


def test_damage_index_zero_baseline_guard():
    report = ma.damage_index(0.0, 1e-6, trip_ratio=2.0)
    assert report.index > 2.0
    assert report.flagged


def test_damage_oracle_perturbation_study():
    """A +5% single-story stiffness change trips the index; a fresh
    excitation of the healthy structure does not."""
    base4 = ma.shear_building(4, 1000.0, 2e6, rayleigh_a0=0.3, rayleigh_a1=2.2e-4)
    mode1 = ma.exact_modes(base4)[0]
    rng = np.random.default_rng(12345)
    rows = [g * (mode1.shape + 0.03 * rng.normal(size=4)) for g in (1.0, 0.9, 0.8, 0.7)]
    smap = np.array(rows)
    healthy = ma.shear_building(4, 1000.0, 2e6, rayleigh_a0=0.3, rayleigh_a1=2.2e-4, sensor_map=smap)
    damaged = ma.perturb_stiffness(healthy, 0, 0.05)

    obs_shape = smap @ mode1.shape
    obs_shape = (obs_shape / np.linalg.norm(obs_shape)).astype(complex)
    twin = ma.ModalModel(
        modes=(ma.Mode(mode1.damped_frequency_hz, mode1.damping_ratio, obs_shape, 1.0),),
        n_channels=4,
    )
    pulse = 0.5 / mode1.frequency_hz

    def deviation(rec):
        result = ma.evaluate_candidate(twin, rec)
        return result.residual_std / float(np.abs(rec.data).max())

    baseline = deviation(impact_record(healthy, 256.0, 25.0, pulse, 4e5, 0.5, seed=100))
    fresh = deviation(impact_record(healthy, 256.0, 25.0, pulse, 4.4e5, 0.5, seed=11))
    hit = deviation(impact_record(damaged, 256.0, 25.0, pulse, 3.6e5, 0.5, seed=21))
    assert ma.damage_index(baseline, hit, trip_ratio=2.0).flagged
    assert not ma.damage_index(baseline, fresh, trip_ratio=2.0).flagged


# --- stream_monitor ----------------------------------------------------------

def _twin(f0=3.0, zeta=0.026):
    return ma.ModalModel(
        modes=(ma.Mode(f0, zeta, np.array([1.0 + 0j]), 1.0),), n_channels=1
    )


def test_monitor_zero_stream_no_events():
    stream = iter(np.zeros((600, 1)))
    events = list(
        ma.stream_monitor(_twin(), stream, threshold=1.0, window_samples=100,
                          sample_rate_hz=100.0, divergence_bound=1e6)
    )
    assert events == []


def test_monitor_single_spike_names_channel():
    data = np.zeros((400, 2))
    data[250, 1] = 9.0
    events = list(
        ma.stream_monitor(
            ma.ModalModel(
                modes=(ma.Mode(3.0, 0.02, np.array([1.0 + 0j, 0.0 + 0j]) / 1.0, 1.0),),
                n_channels=2,
            ),
            iter(data), threshold=5.0, window_samples=100, sample_rate_hz=100.0,
        )
    )
    assert len(events) == 1
    assert events[0].window_start == 200
    assert events[0].channels == (1,)
    assert events[0].cause == "threshold"


def test_monitor_batch_stream_equivalence():
    rng = np.random.default_rng(17)
    data = rng.normal(size=(1000, 3)) * 0.5
    data[333, 0] = 4.0
    data[777, 2] = -6.0
    window = 100
    events = list(
        ma.stream_monitor(
            ma.ModalModel(
                modes=(ma.Mode(3.0, 0.02, np.array([1, 0, 0], dtype=complex), 1.0),),
                n_channels=3,
            ),
            iter(data), threshold=3.0, window_samples=window, sample_rate_hz=100.0,
        )
    )
    # batch reference: windows where any channel magnitude exceeds the bound
    expected = []
    for start in range(0, 1000, window):
        block = data[start : start + window]
        hit = np.nonzero(np.any(np.abs(block) > 3.0, axis=0))[0]
        if hit.size:
            expected.append((start, tuple(int(i) for i in hit)))
    assert [(e.window_start, e.channels) for e in events] == expected


def test_monitor_partial_window_dropped():
    data = np.zeros((250, 1))
    data[240, 0] = 10.0  # inside the trailing partial window
    events = list(
        ma.stream_monitor(_twin(), iter(data), threshold=5.0, window_samples=100,
                          sample_rate_hz=100.0)
    )
    assert events == []


def test_monitor_divergence_fires_before_threshold():
    """A mid-stream stiffness change raises the residual divergence while
    amplitudes are still below the alert threshold."""
    f0, zeta = 3.0, 0.026
    fs = 200.0
    healthy = sdof_system(f0, zeta)
    damaged = ma.perturb_stiffness(healthy, 0, 0.10)
    pulse = int(0.5 / f0 * fs)

    seg_a = ma.integrate_response(
        healthy, ma.Excitation("impulse", 0, -1.5e5, at_sample=int(fs), duration_samples=pulse),
        1 / fs, int(10 * fs), noise_std=0.4, seed=1,
    )
    seg_b = ma.integrate_response(
        damaged, ma.Excitation("impulse", 0, -1.5e5, at_sample=int(fs), duration_samples=pulse),
        1 / fs, int(15 * fs), noise_std=0.4, seed=2,
    )
    big = ma.integrate_response(
        damaged, ma.Excitation("impulse", 0, -6e5, at_sample=int(10 * fs), duration_samples=pulse),
        1 / fs, int(15 * fs), noise_std=0.0, seed=3,
    )
    stream = np.vstack([seg_a.data, seg_b.data + big.data])

    truth = ma.exact_modes(healthy)[0]
    twin = ma.ModalModel(
        modes=(ma.Mode(truth.damped_frequency_hz, truth.damping_ratio,
                       np.array([1.0 + 0j]), 1.0),),
        n_channels=1,
    )
    events = list(
        ma.stream_monitor(twin, iter(stream), threshold=400.0,
                          window_samples=int(fs), sample_rate_hz=fs,
                          divergence_bound=1500.0)
    )
    causes = [e.cause for e in events]
    assert "divergence" in causes and "threshold" in causes
    first_divergence = next(e.window_start for e in events if e.cause == "divergence")
    first_threshold = next(e.window_start for e in events if e.cause == "threshold")
    assert first_divergence < first_threshold
    # the predictive warning happened while amplitudes were still admissible
    warn_window = stream[first_divergence : first_divergence + int(fs)]
    assert float(np.abs(warn_window).max()) < 400.0


def test_alert_profile_invariants_random_signals():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n_ch = int(rng.integers(1, 4))
        data = rng.normal(size=(200, n_ch)) * rng.uniform(0.5, 5.0)
        rec = ma.TimeSeriesSet(64.0, tuple(f"c{i}" for i in range(n_ch)), data)
        grid = np.linspace(0.0, float(np.abs(data).max()) + 0.1, 11)
        profile = ma.duration_curve(rec, grid)
        assert np.all(np.diff(profile.duration_s, axis=0) <= 1e-12)
        assert np.all(profile.triggered_count <= n_ch)
        assert np.all(np.diff(profile.triggered_count) <= 0)
