"""Synthetic multi-DOF test systems with exact modal solutions.

Shear-building chains with Rayleigh damping provide closed-form modal
parameters, and a Newmark average-acceleration integrator produces sensor
acceleration records (optionally noisy, seed-deterministic) for validating
the identification pipeline end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    IndefiniteStiffness,
    InvalidParameter,
    NonProportionalDamping,
    StepTooLarge,
)
from .signals import TimeSeriesSet


@dataclass(frozen=True)
class SyntheticSystem:
    """Mass, damping, and stiffness matrices with a sensor selection map.

    ``sensor_map`` has one row per output channel; outputs are accelerations.
    ``rayleigh`` keeps the (a0, a1) pair when the damping was built
    proportionally, so stiffness perturbations can rebuild it consistently.
    """

    mass: np.ndarray
    stiffness: np.ndarray
    damping: np.ndarray
    n_dof: int
    sensor_map: np.ndarray
    rayleigh: Optional[tuple[float, float]] = None

    def __post_init__(self) -> None:
        m = np.asarray(self.mass, dtype=float)
        k = np.asarray(self.stiffness, dtype=float)
        c = np.asarray(self.damping, dtype=float)
        smap = np.asarray(self.sensor_map, dtype=float)
        n = self.n_dof
        if m.shape != (n, n) or k.shape != (n, n) or c.shape != (n, n):
            raise InvalidParameter("system matrices must be n_dof x n_dof")
        if np.any(np.diag(m) <= 0) or np.any(m - np.diag(np.diag(m)) != 0):
            raise InvalidParameter("mass matrix must be diagonal positive")
        if np.max(np.abs(k - k.T)) > 1e-9 * max(np.max(np.abs(k)), 1e-300):
            raise InvalidParameter("stiffness matrix must be symmetric")
        try:
            np.linalg.cholesky(k)
        except np.linalg.LinAlgError:
            raise IndefiniteStiffness("stiffness matrix is not positive definite") from None
        if smap.ndim != 2 or smap.shape[1] != n:
            raise InvalidParameter("sensor_map must be (n_sensors, n_dof)")
        for arr in (m, k, c, smap):
            arr.setflags(write=False)
        object.__setattr__(self, "mass", m)
        object.__setattr__(self, "stiffness", k)
        object.__setattr__(self, "damping", c)
        object.__setattr__(self, "sensor_map", smap)

    @property
    def n_sensors(self) -> int:
        return self.sensor_map.shape[0]


def _chain_stiffness(story_stiffness: np.ndarray) -> np.ndarray:
    """Tridiagonal stiffness of a fixed-base shear chain."""
    n = story_stiffness.size
    k = np.zeros((n, n))
    for i in range(n):
        k[i, i] += story_stiffness[i]
        if i + 1 < n:
            k[i, i] += story_stiffness[i + 1]
            k[i, i + 1] -= story_stiffness[i + 1]
            k[i + 1, i] -= story_stiffness[i + 1]
    return k


def shear_building(
    n_stories: int,
    story_mass: float,
    story_stiffness: float,
    rayleigh_a0: float = 0.0,
    rayleigh_a1: float = 0.0,
    sensor_map: Optional[np.ndarray] = None,
) -> SyntheticSystem:
    """Uniform lumped-mass shear building with proportional damping.

    ``C = a0 * M + a1 * K``. The default sensor map observes every story.
    """
    if n_stories < 1:
        raise InvalidParameter("n_stories must be at least 1")
    if story_mass <= 0 or story_stiffness <= 0:
        raise InvalidParameter("story mass and stiffness must be positive")
    if rayleigh_a0 < 0 or rayleigh_a1 < 0:
        raise InvalidParameter("Rayleigh coefficients must be nonnegative")
    mass = story_mass * np.eye(n_stories)
    stiffness = _chain_stiffness(np.full(n_stories, float(story_stiffness)))
    damping = rayleigh_a0 * mass + rayleigh_a1 * stiffness
    if sensor_map is None:
        sensor_map = np.eye(n_stories)
    return SyntheticSystem(
        mass=mass,
        stiffness=stiffness,
        damping=damping,
        n_dof=n_stories,
        sensor_map=sensor_map,
        rayleigh=(float(rayleigh_a0), float(rayleigh_a1)),
    )


@dataclass(frozen=True)
class ExactMode:
    """Closed-form modal parameters of a proportionally damped system."""

    frequency_hz: float
    damping_ratio: float
    shape: np.ndarray

    @property
    def damped_frequency_hz(self) -> float:
        return self.frequency_hz * math.sqrt(1.0 - self.damping_ratio**2)


def exact_modes(sys: SyntheticSystem) -> list[ExactMode]:
    """Undamped eigensolution with modal damping ratios.

    Requires the damping matrix to be diagonalized by the undamped modes
    within 1e-8 (relative). Shapes are unit-2-norm with the first significant
    entry rotated to the nonnegative real axis.
    """
    w2, phi = scipy.linalg.eigh(sys.stiffness, sys.mass)
    omega = np.sqrt(np.clip(w2, 0.0, None))
    modal_c = phi.T @ sys.damping @ phi  # phi is mass-normalized by eigh
    off = modal_c - np.diag(np.diag(modal_c))
    scale = max(float(np.max(np.abs(modal_c))), 1e-300)
    if np.max(np.abs(off)) > 1e-8 * scale:
        raise NonProportionalDamping(
            "damping matrix is not diagonalized by the undamped mode shapes"
        )
    modes = []
    for r in range(sys.n_dof):
        if omega[r] <= 0:
            raise InvalidParameter("system has a rigid-body mode")
        zeta = float(modal_c[r, r] / (2.0 * omega[r]))
        vec = phi[:, r]
        significant = np.nonzero(np.abs(vec) > 1e-12)[0]
        if significant.size and vec[significant[0]] < 0:
            vec = -vec
        vec = vec / np.linalg.norm(vec)
        modes.append(
            ExactMode(
                frequency_hz=float(omega[r] / (2.0 * math.pi)),
                damping_ratio=zeta,
                shape=vec,
            )
        )
    return modes


@dataclass(frozen=True)
class Excitation:
    """Excitation description: an impact pulse or stationary white noise.

    ``dof`` selects the loaded coordinate; ``dof = -1`` loads every
    coordinate (independent white noise per DOF). ``at_sample`` places the
    impact in time, and ``duration_samples`` spreads it over a half-sine
    pulse (1 = a single-step force).
    """

    kind: str  # "impulse" | "white"
    dof: int = 0
    amplitude: float = 1.0
    at_sample: int = 0
    duration_samples: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("impulse", "white"):
            raise InvalidParameter("excitation kind must be 'impulse' or 'white'")
        if self.at_sample < 0:
            raise InvalidParameter("at_sample must be nonnegative")
        if self.duration_samples < 1:
            raise InvalidParameter("duration_samples must be at least 1")


def _force_history(exc: Excitation, n_dof: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    forces = np.zeros((n_samples, n_dof))
    if exc.kind == "impulse":
        if exc.at_sample + exc.duration_samples > n_samples:
            raise InvalidParameter("impulse lies outside the record")
        dof = exc.dof if exc.dof >= 0 else 0
        if dof >= n_dof:
            raise InvalidParameter("impulse dof outside the system")
        d = exc.duration_samples
        pulse = exc.amplitude * np.sin(np.pi * (np.arange(d) + 0.5) / d)
        forces[exc.at_sample : exc.at_sample + d, dof] = pulse
    else:
        if exc.dof < 0:
            forces[:] = rng.normal(0.0, exc.amplitude, size=(n_samples, n_dof))
        else:
            if exc.dof >= n_dof:
                raise InvalidParameter("white-noise dof outside the system")
            forces[:, exc.dof] = rng.normal(0.0, exc.amplitude, size=n_samples)
    return forces


def newmark_states(
    sys: SyntheticSystem, forces: np.ndarray, dt: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Average-acceleration Newmark march; returns (u, v, a) histories.

    Unconditionally stable with no algorithmic damping, so undamped free
    vibration conserves mechanical energy to machine precision.
    """
    beta, gamma = 0.25, 0.5
    m, c, k = sys.mass, sys.damping, sys.stiffness
    n_samples, n_dof = forces.shape

    u = np.zeros((n_samples, n_dof))
    v = np.zeros((n_samples, n_dof))
    a = np.zeros((n_samples, n_dof))
    a[0] = np.linalg.solve(m, forces[0] - c @ v[0] - k @ u[0])

    b0 = 1.0 / (beta * dt * dt)
    b1 = gamma / (beta * dt)
    b2 = 1.0 / (beta * dt)
    b3 = 1.0 / (2.0 * beta) - 1.0
    b4 = gamma / beta - 1.0
    b5 = dt * (gamma / (2.0 * beta) - 1.0)

    k_eff = k + b0 * m + b1 * c
    solve = scipy.linalg.cho_factor(k_eff)
    for i in range(n_samples - 1):
        rhs = (
            forces[i + 1]
            + m @ (b0 * u[i] + b2 * v[i] + b3 * a[i])
            + c @ (b1 * u[i] + b4 * v[i] + b5 * a[i])
        )
        u[i + 1] = scipy.linalg.cho_solve(solve, rhs)
        a[i + 1] = b0 * (u[i + 1] - u[i]) - b2 * v[i] - b3 * a[i]
        v[i + 1] = v[i] + dt * ((1.0 - gamma) * a[i] + gamma * a[i + 1])
    return u, v, a


def integrate_response(
    sys: SyntheticSystem,
    excitation: Excitation,
    dt: float,
    n_samples: int,
    noise_std: float = 0.0,
    seed: Optional[int] = None,
) -> TimeSeriesSet:
    """Sensor acceleration record of the system under the given excitation.

    Additive zero-mean Gaussian sensor noise of ``noise_std`` models
    measurement uncertainty; identical seeds give bit-identical output. The
    step must satisfy ``dt < 1 / (10 * f_max)``.
    """
    w2 = scipy.linalg.eigh(sys.stiffness, sys.mass, eigvals_only=True)
    f_max = math.sqrt(float(w2[-1])) / (2.0 * math.pi)
    if dt >= 1.0 / (10.0 * f_max):
        raise StepTooLarge(f"dt = {dt} too coarse for the {f_max:.3g} Hz mode")
    if noise_std < 0:
        raise InvalidParameter("noise_std must be nonnegative")

    rng = np.random.default_rng(seed)
    forces = _force_history(excitation, sys.n_dof, n_samples, rng)
    _, _, accel = newmark_states(sys, forces, dt)
    outputs = accel @ sys.sensor_map.T
    if noise_std > 0:
        outputs = outputs + rng.normal(0.0, noise_std, size=outputs.shape)

    labels = tuple(f"a{i + 1}" for i in range(sys.n_sensors))
    return TimeSeriesSet(1.0 / dt, labels, outputs, t0_s=0.0)


def _story_stiffnesses(k: np.ndarray) -> np.ndarray:
    """Recover per-story spring values from a shear-chain stiffness matrix."""
    n = k.shape[0]
    springs = np.zeros(n)
    if n == 1:
        springs[0] = k[0, 0]
    else:
        for i in range(n - 1):
            springs[i + 1] = -k[i, i + 1]
        springs[0] = k[0, 0] - springs[1]
    rebuilt = _chain_stiffness(springs)
    if np.max(np.abs(rebuilt - k)) > 1e-9 * np.max(np.abs(k)):
        raise InvalidParameter("stiffness matrix is not in shear-chain form")
    return springs


def perturb_stiffness(
    sys: SyntheticSystem, story_index: int, relative_change: float
) -> SyntheticSystem:
    """Scale one story's stiffness contribution by ``1 + relative_change``.

    ``story_index`` counts springs from the base (0 = ground story). When the
    system records Rayleigh coefficients, the damping matrix is rebuilt
    against the perturbed stiffness so it stays proportional.
    """
    springs = _story_stiffnesses(sys.stiffness)
    if not 0 <= story_index < springs.size:
        raise InvalidParameter("story_index outside the chain")
    new_springs = springs.copy()
    new_springs[story_index] *= 1.0 + relative_change
    if new_springs[story_index] <= 0:
        raise IndefiniteStiffness("perturbation removes the story's stiffness")
    stiffness = _chain_stiffness(new_springs)
    try:
        np.linalg.cholesky(stiffness)
    except np.linalg.LinAlgError:
        raise IndefiniteStiffness("perturbed stiffness is not positive definite") from None
    if sys.rayleigh is not None:
        a0, a1 = sys.rayleigh
        damping = a0 * sys.mass + a1 * stiffness
    else:
        damping = sys.damping
    return SyntheticSystem(
        mass=sys.mass,
        stiffness=stiffness,
        damping=damping,
        n_dof=sys.n_dof,
        sensor_map=sys.sensor_map,
        rayleigh=sys.rayleigh,
    )
