"""CSV and manifest output with reproducible byte content.

All CSV files are comma separated, UTF-8, '.' decimal, one header row.
Floats are written with repr so that reading them back reproduces the
exact binary values. Schemas:

    traces.csv:    storage_time_us,t_us,amp_re,amp_im,intensity
    peaks.csv:     storage_time_us,peak_time_us,peak_intensity
    classical.csv: t_us,Mx,My,Mz
    sweep.csv:     b_gauss,freq_hz,freq2_hz,tau_us,model

Intensities are in arbitrary units scaled so the maximum over the
first storage time equals 1 (unless that maximum is zero).
"""

from __future__ import annotations

import hashlib
import json
import math
import os

import numpy as np

from .analysis import PeakSeries
from .dipoles import MomentTrajectory
from .dynamics import RetrievedTrace

TRACES_HEADER = "storage_time_us,t_us,amp_re,amp_im,intensity"
PEAKS_HEADER = "storage_time_us,peak_time_us,peak_intensity"
CLASSICAL_HEADER = "t_us,Mx,My,Mz"
SWEEP_HEADER = "b_gauss,freq_hz,freq2_hz,tau_us,model"


def _fmt(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"refusing to write non-finite value {value}")
    return repr(value)


def intensity_scale(traces: list[RetrievedTrace]) -> float:
    """1 / max intensity of the first storage time, or 1 if that is 0."""
    if not traces:
        raise ValueError("no traces")
    top = float(traces[0].intensity.max())
    return 1.0 / top if top > 0.0 else 1.0


def write_traces_csv(path, traces: list[RetrievedTrace], scale: float = 1.0) -> int:
    amp_scale = math.sqrt(scale)
    lines = [TRACES_HEADER]
    for trace in traces:
        storage_us = _fmt(trace.storage_time * 1e6)
        for t, amp, inten in zip(trace.times, trace.amplitude, trace.intensity):
            lines.append(
                f"{storage_us},{_fmt(t * 1e6)},{_fmt(amp.real * amp_scale)},"
                f"{_fmt(amp.imag * amp_scale)},{_fmt(inten * scale)}"
            )
    _write_text(path, lines)
    return len(lines) - 1


def write_peaks_csv(path, series: PeakSeries, scale: float = 1.0) -> int:
    lines = [PEAKS_HEADER]
    for storage, peak_time, peak in zip(
        series.storage_times, series.peak_time, series.peak_intensity
    ):
        lines.append(f"{_fmt(storage * 1e6)},{_fmt(peak_time * 1e6)},{_fmt(peak * scale)}")
    _write_text(path, lines)
    return len(lines) - 1


def write_classical_csv(path, trajectory: MomentTrajectory) -> int:
    lines = [CLASSICAL_HEADER]
    for t, row in zip(trajectory.times, trajectory.moment):
        lines.append(f"{_fmt(t * 1e6)},{_fmt(row[0])},{_fmt(row[1])},{_fmt(row[2])}")
    _write_text(path, lines)
    return len(lines) - 1


def write_sweep_csv(path, rows: list[dict]) -> int:
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(
            f"{_fmt(row['b_gauss'])},{_fmt(row['freq_hz'])},{_fmt(row['freq2_hz'])},"
            f"{_fmt(row['tau_us'])},{row['model']}"
        )
    _write_text(path, lines)
    return len(lines) - 1


def _write_text(path, lines: list[str]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_csv_columns(path):
    """Read a CSV written by this module: (header tuple, column dict)."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = tuple(lines[0].split(","))
    columns = {name: [] for name in header}
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError(f"{path}:{number}: expected {len(header)} fields, got {len(parts)}")
        for name, part in zip(header, parts):
            columns[name].append(part)
    out = {}
    for name in header:
        if name == "model":
            out[name] = columns[name]
        else:
            try:
                out[name] = np.array([float(v) for v in columns[name]])
            except ValueError as exc:
                raise ValueError(f"{path}: column {name}: {exc}") from exc
    return header, out


def traces_from_columns(columns) -> list[RetrievedTrace]:
    """Rebuild per-storage-time traces from traces.csv columns."""
    storage = columns["storage_time_us"]
    amp = columns["amp_re"] + 1j * columns["amp_im"]
    times = columns["t_us"] * 1e-6
    traces = []
    boundaries = np.nonzero(np.diff(storage) != 0)[0] + 1
    for chunk, t_chunk, s_chunk in zip(
        np.split(amp, boundaries), np.split(times, boundaries), np.split(storage, boundaries)
    ):
        traces.append(RetrievedTrace(float(s_chunk[0]) * 1e-6, t_chunk, chunk))
    return traces


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir, config_dict, derived, output_names, seed, wall_clock_s) -> str:
    """manifest.json: resolved config, derived rates, output hashes."""
    from . import __version__

    outputs = {}
    for name in output_names:
        outputs[name] = file_sha256(os.path.join(out_dir, name))
    manifest = {
        "tool": {"name": "zeemem", "version": __version__},
        "config": config_dict,
        "seed": seed,
        "derived": derived,
        "wall_clock_s": wall_clock_s,
        "outputs": outputs,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path
