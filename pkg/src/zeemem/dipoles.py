"""Classical precessing-dipole ensemble.

Each dipole sits in a static field, so its motion is an exact rotation;
no time stepping is involved. Averaging the rotated moments over a
Gaussian field distribution gives closed-form dephasing envelopes,
which makes this module a trustworthy oracle for the quantum engine's
ensemble behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import MagneticEnvironment, sample_fields


@dataclass(frozen=True)
class DipoleEnsemble:
    """Identical dipoles distributed over an inhomogeneous field.

    gyro: gyromagnetic ratio in rad/s per gauss.
    mu0: shared initial orientation, unit 3-vector.
    """

    env: MagneticEnvironment
    gyro: float
    mu0: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self) -> None:
        gyro = float(self.gyro)
        if not math.isfinite(gyro) or gyro == 0.0:
            raise ValueError(f"gyro must be finite and nonzero, got {self.gyro}")
        mu0 = tuple(float(c) for c in self.mu0)
        if len(mu0) != 3 or not all(math.isfinite(c) for c in mu0):
            raise ValueError("mu0 must be a finite 3-vector")
        if abs(math.hypot(*mu0) - 1.0) > 1e-12:
            raise ValueError("mu0 must be a unit vector within 1e-12")
        object.__setattr__(self, "gyro", gyro)
        object.__setattr__(self, "mu0", mu0)


@dataclass(eq=False)
class MomentTrajectory:
    """Weighted total moment M(t) sampled on a time grid."""

    times: np.ndarray
    moment: np.ndarray  # shape (n_times, 3)

    @property
    def mx(self) -> np.ndarray:
        return self.moment[:, 0]

    @property
    def my(self) -> np.ndarray:
        return self.moment[:, 1]

    @property
    def mz(self) -> np.ndarray:
        return self.moment[:, 2]

    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.moment, axis=1)


def precess(mu, b, gyro: float, t: float) -> np.ndarray:
    """Rotate mu about the unit field axis by angle gyro * |b| * t."""
    mu = np.asarray(mu, dtype=float)
    b = np.asarray(b, dtype=float)
    if mu.shape != (3,) or b.shape != (3,):
        raise ValueError("mu and b must be 3-vectors")
    if not (np.isfinite(mu).all() and np.isfinite(b).all() and math.isfinite(gyro) and math.isfinite(t)):
        raise ValueError("precess requires finite inputs")
    b_mag = float(np.linalg.norm(b))
    if b_mag == 0.0:
        return mu.copy()
    axis = b / b_mag
    angle = gyro * b_mag * t
    cos_a = math.cos(angle)
    sin_a = math.sin(angle)
    return mu * cos_a + np.cross(axis, mu) * sin_a + axis * np.dot(axis, mu) * (1.0 - cos_a)


def _sample_trajectory(mu0, b, gyro, times):
    b_mag = float(np.linalg.norm(b))
    if b_mag == 0.0:
        return np.tile(mu0, (times.size, 1))
    axis = b / b_mag
    angles = gyro * b_mag * times
    cos_a = np.cos(angles)[:, None]
    sin_a = np.sin(angles)[:, None]
    perp = np.cross(axis, mu0)
    along = axis * float(np.dot(axis, mu0))
    return mu0 * cos_a + perp * sin_a + along * (1.0 - cos_a)


def total_moment(ensemble: DipoleEnsemble, times) -> MomentTrajectory:
    """Weighted sum of precessing dipoles, reduced in sample order."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    if not np.isfinite(times).all():
        raise ValueError("times must be finite")
    samples = sample_fields(ensemble.env)
    total = math.fsum(w for _, w in samples)
    mu0 = np.asarray(ensemble.mu0)
    moment = np.zeros((times.size, 3))
    for b, weight in samples:
        moment += (weight / total) * _sample_trajectory(
            mu0, np.asarray(b), ensemble.gyro, times
        )
    return MomentTrajectory(times, moment)
