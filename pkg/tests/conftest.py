"""Shared oracle builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg

import modalert as ma
from modalert.oracle import SyntheticSystem


def oriented(rec: ma.TimeSeriesSet) -> ma.TimeSeriesSet:
    """Flip channel polarity so the record's global peak is positive.

    Accelerometer orientation is an arbitrary mounting choice; the simulated
    free decay starts on the positive side of its reference channel.
    """
    peak_value = rec.data.flat[int(np.argmax(np.abs(rec.data)))]
    return rec.with_data(-rec.data) if peak_value < 0 else rec


def modal_damping_system(base: SyntheticSystem, zetas) -> SyntheticSystem:
    """Rebuild the damping matrix to hit exact modal damping ratios."""
    w2, phi = scipy.linalg.eigh(base.stiffness, base.mass)
    omega = np.sqrt(w2)
    c = base.mass @ phi @ np.diag(2.0 * np.asarray(zetas) * omega) @ phi.T @ base.mass
    return SyntheticSystem(
        mass=base.mass,
        stiffness=base.stiffness,
        damping=0.5 * (c + c.T),
        n_dof=base.n_dof,
        sensor_map=base.sensor_map,
    )


def sdof_system(f0_hz: float, zeta: float, mass: float = 1000.0) -> SyntheticSystem:
    omega = 2.0 * np.pi * f0_hz
    return ma.shear_building(1, mass, mass * omega**2, rayleigh_a0=2.0 * zeta * omega)


def impact_record(
    system: SyntheticSystem,
    fs: float,
    duration_s: float,
    pulse_s: float,
    amplitude: float,
    noise_std: float,
    seed: int,
    at_sample: int = 5,
) -> ma.TimeSeriesSet:
    """Half-sine impact record, oriented so the global peak is positive."""
    rec = ma.integrate_response(
        system,
        ma.Excitation("impulse", 0, amplitude, at_sample=at_sample,
                      duration_samples=max(1, int(pulse_s * fs))),
        dt=1.0 / fs,
        n_samples=int(fs * duration_s),
        noise_std=noise_std,
        seed=seed,
    )
    return oriented(rec)


@pytest.fixture(scope="session")
def reference_4dof() -> SyntheticSystem:
    """Four-story benchmark-style chain with light Rayleigh damping."""
    return ma.shear_building(4, 1000.0, 2e6, rayleigh_a0=0.3, rayleigh_a1=2.2e-4)


@pytest.fixture(scope="session")
def twelve_sensor_map() -> np.ndarray:
    """Three sensors per story with distinct gains: 12 channels on 4 DOFs."""
    gains = (1.0, 0.8, 0.6)
    smap = np.zeros((12, 4))
    for story in range(4):
        for j, g in enumerate(gains):
            smap[3 * story + j, story] = g
    return smap
