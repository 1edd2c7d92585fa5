"""Command line interface.

Subcommands: simulate (storage sequence over the field ensemble),
classical (precessing dipole ensemble), sweep (simulate over a list of
mean-field magnitudes plus a line fit), analyze (summary quantities
from an existing CSV), preset (list or execute named configurations).
Exit codes: 0 success, 2 configuration or input error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import (
    AnalysisError,
    PeakSeries,
    dominant_frequencies,
    fundamental_frequency,
    extract_peaks,
    fit_envelope,
    linear_fit,
)
from .config import (
    PRESET_NAMES,
    ClassicalConfig,
    ConfigError,
    RunConfig,
    build_preset,
    load_config,
    serialize_config,
)
from .dipoles import DipoleEnsemble, total_moment
from .dynamics import NumericalError, larmor_frequency
from .ensemble import run_ensemble
from .runio import (
    CLASSICAL_HEADER,
    PEAKS_HEADER,
    SWEEP_HEADER,
    TRACES_HEADER,
    intensity_scale,
    read_csv_columns,
    traces_from_columns,
    write_classical_csv,
    write_manifest,
    write_peaks_csv,
    write_sweep_csv,
    write_traces_csv,
)

_SAMPLER_FLAGS = {"gh": "gauss_hermite", "mc": "monte_carlo"}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--seed", type=int, help="override the sampling seed")
    parser.add_argument("--samples", type=int, help="override the sub-sample count")
    parser.add_argument("--sampler", choices=sorted(_SAMPLER_FLAGS), help="field sampler")
    parser.add_argument(
        "--sum", dest="combine", choices=("coherent", "incoherent"),
        help="how sub-sample signals are combined",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeemem",
        description="Light storage in ground-state Zeeman coherences.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    p_sim = sub.add_parser("simulate", help="run the storage sequence over the field ensemble")
    p_sim.add_argument("--config", required=True, help="YAML run configuration")
    _add_common_flags(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cls = sub.add_parser("classical", help="run the classical dipole ensemble")
    p_cls.add_argument("--config", required=True, help="YAML config with a 'classical' block")
    _add_common_flags(p_cls)
    p_cls.set_defaults(func=_cmd_classical)

    p_swp = sub.add_parser("sweep", help="repeat simulate over mean-field magnitudes")
    p_swp.add_argument("--config", required=True, help="YAML run configuration with sweep_gauss")
    _add_common_flags(p_swp)
    p_swp.set_defaults(func=_cmd_sweep)

    p_ana = sub.add_parser("analyze", help="extract summary quantities from an existing CSV")
    p_ana.add_argument("input", help="traces.csv, peaks.csv, sweep.csv, or classical.csv")
    p_ana.add_argument("--out", help="output directory (default: next to the input)")
    p_ana.add_argument("--quiet", action="store_true")
    p_ana.set_defaults(func=_cmd_analyze)

    p_pre = sub.add_parser("preset", help="list or execute named configurations")
    p_pre.add_argument("name", nargs="?", help=f"one of: {', '.join(PRESET_NAMES)}")
    p_pre.add_argument("--list", action="store_true", help="list preset names and exit")
    _add_common_flags(p_pre)
    p_pre.set_defaults(func=_cmd_preset)

    return parser


def _apply_overrides(config, args):
    env = config.environment
    env_updates = {}
    if getattr(args, "seed", None) is not None:
        env_updates["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        env_updates["n_samples"] = args.samples
    if getattr(args, "sampler", None) is not None:
        env_updates["sampler"] = _SAMPLER_FLAGS[args.sampler]
    updates = {}
    if env_updates:
        updates["environment"] = dataclasses.replace(env, **env_updates)
    if getattr(args, "combine", None) is not None and isinstance(config, RunConfig):
        updates["combine"] = args.combine
    if getattr(args, "out", None):
        updates["output_dir"] = args.out
    return dataclasses.replace(config, **updates) if updates else config


def _derived_quantities(config: RunConfig) -> dict:
    units = config.units
    env = config.environment
    b_mag = float(np.linalg.norm(env.mean))
    omega, period = larmor_frequency(config.scheme.g_ground, b_mag, units)
    return {
        "gamma_hz": units.gamma_hz,
        "gamma_rad_per_s": units.gamma_rad,
        "larmor_rad_per_s": omega,
        "larmor_hz": omega / (2.0 * math.pi),
        "larmor_period_s": period if math.isfinite(period) else None,
        "sigma_omega_rad_per_s": abs(config.scheme.g_ground) * units.mu_b_rad_per_gauss * env.sigma,
    }


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


def _execute_simulate(config: RunConfig, quiet: bool) -> int:
    start = time.perf_counter()
    result = run_ensemble(
        config.scheme,
        config.sequence(),
        config.environment,
        config.storage_seconds(),
        config.integrator,
        config.units,
        combine=config.combine,
    )
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    scale = intensity_scale(result.traces)
    n_rows = write_traces_csv(os.path.join(out_dir, "traces.csv"), result.traces, scale)
    series = extract_peaks(result.traces)
    write_peaks_csv(os.path.join(out_dir, "peaks.csv"), series, scale)
    write_manifest(
        out_dir,
        config.to_dict(),
        _derived_quantities(config),
        ["traces.csv", "peaks.csv"],
        config.environment.seed,
        time.perf_counter() - start,
    )
    _say(quiet, f"wrote {out_dir}: traces.csv ({n_rows} rows), peaks.csv, manifest.json")
    return 0


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    if isinstance(config, ClassicalConfig):
        raise ConfigError("simulate needs a quantum run config, not a 'classical' block")
    return _execute_simulate(_apply_overrides(config, args), args.quiet)


def _execute_classical(config: ClassicalConfig, quiet: bool) -> int:
    start = time.perf_counter()
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    times = config.times_seconds()
    names = []
    for case in config.cases:
        env = config.case_environment(case)
        ensemble = DipoleEnsemble(env, config.gyro_rad_per_s_gauss, config.mu0)
        trajectory = total_moment(ensemble, times)
        name = "classical.csv" if config.cases == ("custom",) else f"classical_{case}.csv"
        write_classical_csv(os.path.join(out_dir, name), trajectory)
        names.append(name)
    gyro = config.gyro_rad_per_s_gauss
    derived = {
        "case_precession_hz": abs(gyro) * config.case_magnitude_gauss / (2.0 * math.pi),
        "sigma_precession_hz": abs(gyro) * config.environment.sigma / (2.0 * math.pi),
    }
    write_manifest(
        out_dir,
        config.to_dict(),
        derived,
        names,
        config.environment.seed,
        time.perf_counter() - start,
    )
    _say(quiet, f"wrote {out_dir}: {', '.join(names)}, manifest.json")
    return 0


def _cmd_classical(args) -> int:
    config = load_config(args.config)
    if not isinstance(config, ClassicalConfig):
        raise ConfigError("classical needs a config with a 'classical' block")
    return _execute_classical(_apply_overrides(config, args), args.quiet)


def _fit_payload(report) -> dict:
    return {
        "model": report.model,
        "tau_us": report.tau * 1e6,
        "amplitude": report.amplitude,
        "offset": report.offset,
        "r_squared": report.r_squared,
    }


def _spectrum_payload(spectrum) -> list[dict]:
    return [
        {"freq_hz": float(f), "amplitude": float(a)}
        for f, a in zip(spectrum.frequencies, spectrum.amplitudes)
    ]


def _execute_sweep(config: RunConfig, quiet: bool) -> int:
    if not config.sweep_gauss:
        raise ConfigError("sweep requires sweep_gauss in the config")
    mean = np.asarray(config.environment.mean)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise ConfigError(
            "sweep requires a nonzero environment.mean_gauss to set the field direction"
        )
    direction = mean / norm
    start = time.perf_counter()
    rows = []
    for b in config.sweep_gauss:
        env = dataclasses.replace(
            config.environment, mean=tuple(float(c) for c in b * direction)
        )
        result = run_ensemble(
            config.scheme,
            config.sequence(),
            env,
            config.storage_seconds(),
            config.integrator,
            config.units,
            combine=config.combine,
        )
        series = extract_peaks(result.traces)
        spectrum = dominant_frequencies(series, max_peaks=5)
        freq, companion = fundamental_frequency(spectrum)
        report = fit_envelope(series)
        rows.append(
            {
                "b_gauss": b,
                "freq_hz": freq,
                "freq2_hz": companion,
                "tau_us": report.tau * 1e6,
                "model": report.model,
            }
        )
        _say(quiet, f"B = {b} G: fundamental {freq / 1e3:.1f} kHz")
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    write_sweep_csv(os.path.join(out_dir, "sweep.csv"), rows)
    line = linear_fit([row["b_gauss"] for row in rows], [row["freq_hz"] for row in rows])
    payload = {
        "kind": "sweep",
        "line": {
            "slope_hz_per_gauss": line.slope,
            "intercept_hz": line.intercept,
            "r_squared": line.r_squared,
        },
    }
    with open(os.path.join(out_dir, "analysis.json"), "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    write_manifest(
        out_dir,
        config.to_dict(),
        _derived_quantities(config),
        ["sweep.csv", "analysis.json"],
        config.environment.seed,
        time.perf_counter() - start,
    )
    _say(
        quiet,
        f"wrote {out_dir}: sweep.csv, analysis.json "
        f"(slope {line.slope / 1e6:.4f} MHz/G, r^2 {line.r_squared:.6f})",
    )
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    if isinstance(config, ClassicalConfig):
        raise ConfigError("sweep needs a quantum run config, not a 'classical' block")
    return _execute_sweep(_apply_overrides(config, args), args.quiet)


def _analyze_series(series: PeakSeries, payload: dict) -> None:
    try:
        payload["envelope"] = _fit_payload(fit_envelope(series))
    except AnalysisError as exc:
        payload["envelope"] = {"error": str(exc)}
    try:
        payload["frequencies"] = _spectrum_payload(dominant_frequencies(series))
    except AnalysisError as exc:
        payload["frequencies"] = {"error": str(exc)}


def _cmd_analyze(args) -> int:
    header, columns = read_csv_columns(args.input)
    header_line = ",".join(header)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.input))
    os.makedirs(out_dir, exist_ok=True)
    payload: dict = {"input": os.path.basename(args.input)}

    if header_line == TRACES_HEADER:
        payload["kind"] = "traces"
        traces = traces_from_columns(columns)
        series = extract_peaks(traces)
        write_peaks_csv(os.path.join(out_dir, "peaks.csv"), series)
        _analyze_series(series, payload)
    elif header_line == PEAKS_HEADER:
        payload["kind"] = "peaks"
        series = PeakSeries(
            columns["storage_time_us"] * 1e-6,
            columns["peak_intensity"],
            columns["peak_time_us"] * 1e-6,
        )
        _analyze_series(series, payload)
    elif header_line == SWEEP_HEADER:
        payload["kind"] = "sweep"
        line = linear_fit(columns["b_gauss"], columns["freq_hz"])
        payload["line"] = {
            "slope_hz_per_gauss": line.slope,
            "intercept_hz": line.intercept,
            "r_squared": line.r_squared,
        }
    elif header_line == CLASSICAL_HEADER:
        payload["kind"] = "classical"
        times = columns["t_us"] * 1e-6
        moment = np.column_stack([columns["Mx"], columns["My"], columns["Mz"]])
        magnitude = np.linalg.norm(moment, axis=1)
        _analyze_series(PeakSeries(times, magnitude, np.zeros_like(times)), payload)
        # the y projection oscillates; report its spectrum separately
        try:
            shifted = PeakSeries(times, columns["My"] + 1.0 + 1e-9, np.zeros_like(times))
            payload["my_frequencies"] = _spectrum_payload(dominant_frequencies(shifted))
        except AnalysisError as exc:
            payload["my_frequencies"] = {"error": str(exc)}
    else:
        raise ConfigError(f"unrecognized CSV header in {args.input}: {header_line}")

    path = os.path.join(out_dir, "analysis.json")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    _say(args.quiet, f"wrote {path}")
    return 0


def _cmd_preset(args) -> int:
    if args.list or args.name is None:
        for name in PRESET_NAMES:
            print(name)
        return 0
    config = build_preset(args.name)
    if not args.out:
        args.out = os.path.join("out", args.name)
    config = _apply_overrides(config, args)
    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, "config.yaml"), "w", encoding="utf-8") as handle:
        handle.write(serialize_config(config))
    if isinstance(config, ClassicalConfig):
        return _execute_classical(config, args.quiet)
    if config.sweep_gauss:
        return _execute_sweep(config, args.quiet)
    return _execute_simulate(config, args.quiet)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
