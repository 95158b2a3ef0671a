"""Ingestion, energy, residual, and statistics checks."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import modalert as ma
from modalert.errors import (
    ChannelMismatch,
    EmptyRecord,
    IrregularSampling,
    LengthMismatch,
    MalformedInput,
    RateMismatch,
)


def _ts(data, fs=100.0, t0=0.0):
    arr = np.atleast_2d(np.asarray(data, dtype=float))
    if arr.shape[0] == 1:
        arr = arr.T
    labels = tuple(f"c{i}" for i in range(arr.shape[1]))
    return ma.TimeSeriesSet(fs, labels, arr, t0)


# --- load_timeseries ----------------------------------------------------------

def test_load_three_row_csv():
    ts = ma.load_timeseries(io.StringIO("t,a1\n0,0\n0.004,1\n0.008,0\n"))
    assert ts.sample_rate_hz == pytest.approx(250.0)
    assert ts.n_channels == 1
    assert ts.labels == ("a1",)
    assert np.allclose(ts.data[:, 0], [0.0, 1.0, 0.0])
    assert ts.t0_s == 0.0


def test_load_rejects_nan_cell():
    with pytest.raises(MalformedInput):
        ma.load_timeseries(io.StringIO("t,a1\n0,0\n0.004,nan\n0.008,0\n"))


def test_load_rejects_unparseable_row():
    with pytest.raises(MalformedInput):
        ma.load_timeseries(io.StringIO("t,a1\n0,0\n0.004,oops\n"))


def test_load_rejects_ragged_row():
    with pytest.raises(MalformedInput):
        ma.load_timeseries(io.StringIO("t,a1,a2\n0,0,0\n0.004,1\n"))


def test_load_empty_and_single_row():
    with pytest.raises(EmptyRecord):
        ma.load_timeseries(io.StringIO("t,a1\n"))
    with pytest.raises(EmptyRecord):
        ma.load_timeseries(io.StringIO("t,a1\n0,1\n"))


def test_load_irregular_gap():
    with pytest.raises(IrregularSampling):
        ma.load_timeseries(io.StringIO("t,a1\n0,0\n0.004,1\n0.009,0\n0.012,1\n"))


def test_load_nonmonotone_time():
    with pytest.raises(IrregularSampling):
        ma.load_timeseries(io.StringIO("t,a1\n0,0\n0.004,1\n0.002,0\n"))


def test_load_twelve_channel_layout():
    fs = 250.0
    n = 30
    rng = np.random.default_rng(0)
    labels = [f"s{i}" for i in range(1, 13)]
    lines = ["t," + ",".join(labels)]
    data = rng.normal(size=(n, 12))
    for k in range(n):
        lines.append(f"{k / fs}," + ",".join(str(v) for v in data[k]))
    ts = ma.load_timeseries(io.StringIO("\n".join(lines) + "\n"))
    assert ts.n_channels == 12
    assert ts.sample_rate_hz == pytest.approx(250.0, rel=1e-9)
    assert all(len(ts.channel(i)) == n for i in range(12))


def test_load_accepts_crlf_and_bytes():
    raw = b"t,a1\r\n0,0\r\n0.01,2\r\n0.02,1\r\n"
    ts = ma.load_timeseries(raw)
    assert ts.sample_rate_hz == pytest.approx(100.0)
    assert ts.data[1, 0] == 2.0


# --- signal_energy -----------------------------------------------------------

def test_energy_zero_signal():
    assert ma.signal_energy([0.0, 0.0, 0.0]) == 0.0


def test_energy_direct_sum():
    assert ma.signal_energy([1.0, -2.0, 2.0]) == pytest.approx(9.0)


def test_energy_empty():
    assert ma.signal_energy([]) == 0.0


def test_energy_parseval_identity():
    # independent route: the DFT power theorem
    rng = np.random.default_rng(7)
    x = rng.normal(size=1000)
    spectrum = np.fft.fft(x)
    freq_energy = float(np.sum(np.abs(spectrum) ** 2) / len(x))
    assert ma.signal_energy(x) == pytest.approx(freq_energy, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=64),
    st.floats(-100.0, 100.0),
)
def test_energy_quadratic_homogeneity(xs, c):
    x = np.asarray(xs)
    assert ma.signal_energy(c * x) == pytest.approx(c * c * ma.signal_energy(x), rel=1e-9, abs=1e-9)


def test_energy_zero_iff_all_zero():
    rng = np.random.default_rng(1)
    x = rng.normal(size=32)
    assert ma.signal_energy(x) > 0
    assert ma.signal_energy(np.zeros(32)) == 0.0


# --- residual_series ---------------------------------------------------------

def test_residual_identity_is_zero():
    a = _ts([1.0, 2.0, -3.0])
    res = ma.residual_series(a, a)
    assert np.all(res.data == 0.0)


def test_residual_direct_subtraction():
    res = ma.residual_series(_ts([1.0, 2.0]), _ts([0.0, 2.0]))
    assert np.allclose(res.data[:, 0], [1.0, 0.0])


def test_residual_truncates_one_sample():
    res = ma.residual_series(_ts([1.0, 2.0, 3.0]), _ts([1.0, 2.0]))
    assert res.n_samples == 2


def test_residual_rejects_larger_gap():
    with pytest.raises(LengthMismatch):
        ma.residual_series(_ts([1.0, 2.0, 3.0, 4.0]), _ts([1.0, 2.0]))


def test_residual_channel_and_rate_mismatch():
    two = ma.TimeSeriesSet(100.0, ("a", "b"), np.zeros((4, 2)))
    one = _ts([0.0, 0.0, 0.0, 0.0])
    with pytest.raises(ChannelMismatch):
        ma.residual_series(two, one)
    with pytest.raises(RateMismatch):
        ma.residual_series(_ts([0.0, 1.0], fs=100.0), _ts([0.0, 1.0], fs=200.0))


def test_residual_oracle_self_consistency():
    sys_ = ma.shear_building(4, 1000.0, 2e6, 0.3, 2.2e-4)
    rec = ma.integrate_response(sys_, ma.Excitation("impulse", 0, 1e4), 1 / 256, 512, seed=3)
    res = ma.residual_series(rec, rec)
    assert ma.signal_energy(res.data) <= 1e-12


# --- residual_stats ----------------------------------------------------------

def test_stats_hand_computed_single_channel():
    stats = ma.residual_stats(_ts([1.0, -1.0, 1.0, -1.0]))
    assert stats.mean[0] == pytest.approx(0.0)
    assert stats.covariance[0, 0] == pytest.approx(4.0 / 3.0)
    assert stats.energy == pytest.approx(4.0)
    assert stats.pooled_std == pytest.approx(1.0)
    assert stats.n_samples == 4


def test_stats_zero_residual():
    stats = ma.residual_stats(_ts(np.zeros(8)))
    assert stats.mean[0] == 0.0
    assert stats.covariance[0, 0] == 0.0
    assert stats.pooled_std == 0.0
    assert stats.energy == 0.0


def test_stats_accepts_minimum_record():
    # two samples is the smallest record the containers admit
    stats = ma.residual_stats(_ts([0.0, 1.0]))
    assert stats.n_samples == 2
    assert stats.covariance[0, 0] == pytest.approx(0.5)


def test_stats_against_two_pass_covariance_oracle():
    rng = np.random.default_rng(11)
    data = rng.normal(size=(200, 2)) @ np.array([[1.0, 0.4], [0.0, 0.8]])
    ts = ma.TimeSeriesSet(50.0, ("x", "y"), data)
    stats = ma.residual_stats(ts)
    # brute force: explicit two-pass covariance
    mean = data.sum(axis=0) / len(data)
    acc = np.zeros((2, 2))
    for row in data:
        d = row - mean
        acc += np.outer(d, d)
    brute = acc / (len(data) - 1)
    assert np.allclose(stats.covariance, brute, atol=1e-10)
    assert np.allclose(stats.mean, mean, atol=1e-12)


def test_stats_covariance_positive_semidefinite():
    rng = np.random.default_rng(5)
    for trial in range(10):
        data = rng.normal(size=(64, 5)) * rng.uniform(0.1, 10.0)
        stats = ma.residual_stats(ma.TimeSeriesSet(10.0, tuple("abcde"), data))
        eigs = np.linalg.eigvalsh(stats.covariance)
        assert eigs.min() >= -1e-10 * np.trace(stats.covariance)


def test_timeseries_validation():
    with pytest.raises(ValueError):
        ma.TimeSeriesSet(0.0, ("a",), np.zeros((4, 1)))
    with pytest.raises(ValueError):
        ma.TimeSeriesSet(10.0, ("a",), np.array([[np.nan], [1.0]]))
    with pytest.raises(ValueError):
        ma.TimeSeriesSet(10.0, ("a", "b"), np.zeros((4, 1)))
    ts = _ts([1.0, 2.0])
    with pytest.raises(ValueError):
        ts.data[0, 0] = 9.0  # immutable storage
