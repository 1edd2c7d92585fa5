"""Ensemble averaging over inhomogeneous static magnetic fields.

The sample is modeled as independent homogeneous sub-samples. Each
sub-sample sees a field ``mean + delta_i * inhom_axis`` with ``delta_i``
drawn from a zero-mean Gaussian of width ``sigma``, either by
Gauss-Hermite quadrature (deterministic, default) or Monte Carlo.
The retrieved signal is the weight-normalized sum over sub-samples:
coherent mode sums complex amplitudes before squaring, incoherent mode
sums intensities.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .angular import LevelScheme
from .dynamics import (
    IntegratorConfig,
    PulseSequence,
    RetrievedTrace,
    UnitSystem,
    sequence_traces,
)

SAMPLERS = ("gauss_hermite", "monte_carlo")
COMBINE_MODES = ("coherent", "incoherent")

# Environment variable capping the process pool size. Unset or "1"
# keeps everything in the calling process.
WORKERS_VAR = "ZMS_THREADS"


@dataclass(frozen=True)
class MagneticEnvironment:
    """Gaussian field distribution along a fixed axis.

    mean: field seen by the central sub-sample, gauss.
    sigma: standard deviation of the scalar spread, gauss.
    inhom_axis: unit vector the spread is applied along.
    sampler: "gauss_hermite" or "monte_carlo".
    n_samples: number of sub-samples.
    seed: RNG seed, used by the Monte Carlo sampler only.
    """

    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sigma: float = 0.0
    inhom_axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    sampler: str = "gauss_hermite"
    n_samples: int = 21
    seed: int = 0

    def __post_init__(self) -> None:
        mean = tuple(float(c) for c in self.mean)
        axis = tuple(float(c) for c in self.inhom_axis)
        if len(mean) != 3 or not all(math.isfinite(c) for c in mean):
            raise ValueError("mean must be a finite 3-vector in gauss")
        if len(axis) != 3 or not all(math.isfinite(c) for c in axis):
            raise ValueError("inhom_axis must be a finite 3-vector")
        if abs(math.hypot(*axis) - 1.0) > 1e-12:
            raise ValueError("inhom_axis must be a unit vector within 1e-12")
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma < 0.0:
            raise ValueError(f"sigma must be >= 0 gauss, got {self.sigma}")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        n = int(self.n_samples)
        if n < 1 or n != self.n_samples:
            raise ValueError(f"n_samples must be a positive integer, got {self.n_samples}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "inhom_axis", axis)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "n_samples", n)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(eq=False)
class EnsembleResult:
    """Combined retrieved traces, one per storage time, plus run metadata."""

    storage_times: np.ndarray
    traces: list[RetrievedTrace]
    manifest: dict

    def peak_intensities(self) -> np.ndarray:
        return np.array([trace.intensity.max() for trace in self.traces])


def sample_fields(env: MagneticEnvironment) -> list[tuple[tuple[float, float, float], float]]:
    """Return (field 3-vector in gauss, weight) pairs; weights sum to 1."""
    if env.sampler == "gauss_hermite":
        nodes, raw = np.polynomial.hermite.hermgauss(env.n_samples)
        deltas = math.sqrt(2.0) * env.sigma * nodes
        weights = raw / math.sqrt(math.pi)
    else:
        rng = np.random.default_rng(env.seed)
        deltas = rng.normal(0.0, env.sigma, env.n_samples)
        weights = np.full(env.n_samples, 1.0 / env.n_samples)
    mean = np.asarray(env.mean)
    axis = np.asarray(env.inhom_axis)
    out = []
    for delta, weight in zip(deltas, weights):
        b = mean + delta * axis
        out.append(((float(b[0]), float(b[1]), float(b[2])), float(weight)))
    return out


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_VAR} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_VAR} must be a positive integer, got {raw!r}")
    return n


def _run_sample(job):
    scheme, sequence, b_field, storage, integrator, units = job
    return sequence_traces(scheme, sequence, b_field, storage, integrator, units)


def run_ensemble(
    scheme: LevelScheme,
    sequence: PulseSequence,
    env: MagneticEnvironment,
    storage_times,
    integrator: IntegratorConfig | None = None,
    units: UnitSystem | None = None,
    combine: str = "coherent",
) -> EnsembleResult:
    """Run the storage sequence for every sampled field and combine.

    The reduction is performed in sample-index order whatever the
    execution schedule, so the result is independent of worker count.
    In incoherent mode the returned amplitude is the square root of the
    summed intensity (phase information is deliberately dropped).
    """
    if combine not in COMBINE_MODES:
        raise ValueError(f"combine must be one of {COMBINE_MODES}, got {combine!r}")
    storage = np.asarray(storage_times, dtype=float)
    if storage.ndim != 1 or storage.size == 0:
        raise ValueError("storage_times must be a nonempty 1-d sequence")
    if not np.isfinite(storage).all() or (storage < 0).any():
        raise ValueError("storage_times must be finite and >= 0")
    integrator = integrator if integrator is not None else IntegratorConfig()
    units = units if units is not None else UnitSystem()

    samples = sample_fields(env)
    total = math.fsum(w for _, w in samples)
    norm_weights = [w / total for _, w in samples]

    jobs = [(scheme, sequence, b, storage, integrator, units) for b, _ in samples]
    workers = min(_worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_sample = list(pool.map(_run_sample, jobs))
    else:
        per_sample = [_run_sample(job) for job in jobs]

    times = per_sample[0][0].times
    if combine == "coherent":
        acc = np.zeros((storage.size, times.size), dtype=complex)
        for weight, traces in zip(norm_weights, per_sample):
            for k, trace in enumerate(traces):
                acc[k] += weight * trace.amplitude
        combined = [
            RetrievedTrace(float(storage[k]), times.copy(), acc[k])
            for k in range(storage.size)
        ]
    else:
        acc = np.zeros((storage.size, times.size))
        for weight, traces in zip(norm_weights, per_sample):
            for k, trace in enumerate(traces):
                acc[k] += weight * trace.intensity
        combined = [
            RetrievedTrace(
                float(storage[k]), times.copy(), np.sqrt(acc[k]).astype(complex)
            )
            for k in range(storage.size)
        ]

    manifest = {
        "mean_gauss": list(env.mean),
        "sigma_gauss": env.sigma,
        "inhom_axis": list(env.inhom_axis),
        "sampler": env.sampler,
        "n_samples": env.n_samples,
        "seed": env.seed,
        "combine": combine,
    }
    return EnsembleResult(storage, combined, manifest)
