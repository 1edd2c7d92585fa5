"""Run configuration: YAML schema, validation, and named presets.

A config file is a YAML mapping. Quantum runs use the top-level keys
``units``, ``scheme``, ``sequence``, ``environment``, ``integrator``,
``combine``, ``output_dir``, and optionally ``sweep_gauss``; classical
dipole runs put everything under a single ``classical`` key. Rabi
amplitudes, the field spread, the mean field, and the detection
polarization carry no defaults and must be stated explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .angular import LevelScheme, SphericalPolarization, spherical_components
from .dynamics import (
    FieldSegment,
    IntegratorConfig,
    OpticalField,
    PulseSequence,
    UnitSystem,
)
from .ensemble import COMBINE_MODES, SAMPLERS, MagneticEnvironment

PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7", "circular")

_AXIS_TOKENS = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}

_POLARIZATION_TOKENS = {
    "x": SphericalPolarization.linear_x,
    "y": SphericalPolarization.linear_y,
    "z": SphericalPolarization.linear_z,
    "sigma+": SphericalPolarization.sigma_plus,
    "sigma-": SphericalPolarization.sigma_minus,
}

_SAMPLER_ALIASES = {"gh": "gauss_hermite", "mc": "monte_carlo"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


def _require(mapping, key, path):
    if key not in mapping:
        raise ConfigError(f"{path}.{key} is required")
    return mapping[key]


def _mapping(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path} must be a mapping")
    return value


def _number(value, path, minimum=None, strict=False, allow_zero=True):
    if isinstance(value, str):
        # YAML 1.1 loads exponents without a sign ("1.0e6") as strings
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{path} must be a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"{path} must be finite")
    if minimum is not None:
        if strict and out <= minimum:
            raise ConfigError(f"{path} must be > {minimum}, got {value}")
        if not strict and out < minimum:
            raise ConfigError(f"{path} must be >= {minimum}, got {value}")
    if not allow_zero and out == 0.0:
        raise ConfigError(f"{path} must be nonzero")
    return out


def _integer(value, path, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{path} must be >= {minimum}, got {value}")
    return value


def _vector3(value, path):
    if isinstance(value, str):
        if value in _AXIS_TOKENS:
            return _AXIS_TOKENS[value]
        raise ConfigError(f"{path}: unknown axis token {value!r} (use x, y, z or a 3-list)")
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{path} must be a 3-component list")
    return tuple(_number(c, f"{path}[{i}]") for i, c in enumerate(value))


def _polarization(value, path) -> SphericalPolarization:
    if isinstance(value, str):
        maker = _POLARIZATION_TOKENS.get(value)
        if maker is None:
            raise ConfigError(
                f"{path}: unknown polarization {value!r} "
                f"(tokens: {', '.join(sorted(_POLARIZATION_TOKENS))})"
            )
        return maker()
    if isinstance(value, (list, tuple)):
        cart = _vector3(value, path)
        try:
            return spherical_components(cart)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if isinstance(value, dict):
        comps = []
        for key in ("e_minus", "e_zero", "e_plus"):
            pair = _require(value, key, path)
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"{path}.{key} must be a [re, im] pair")
            comps.append(complex(_number(pair[0], f"{path}.{key}[0]"),
                                 _number(pair[1], f"{path}.{key}[1]")))
        try:
            return SphericalPolarization(*comps)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path} must be a token, 3-list, or spherical mapping")


def _polarization_dict(pol: SphericalPolarization) -> dict:
    return {
        "e_minus": [pol.e_minus.real, pol.e_minus.imag],
        "e_zero": [pol.e_zero.real, pol.e_zero.imag],
        "e_plus": [pol.e_plus.real, pol.e_plus.imag],
    }


def _optical_field(entry, path) -> OpticalField:
    entry = _mapping(entry, path)
    rabi = _number(_require(entry, "rabi", path), f"{path}.rabi", minimum=0.0)
    pol = _polarization(_require(entry, "polarization", path), f"{path}.polarization")
    phase = _number(entry.get("phase", 0.0), f"{path}.phase")
    detuning = _number(entry.get("detuning", 0.0), f"{path}.detuning")
    for key in entry:
        if key not in ("rabi", "polarization", "phase", "detuning"):
            raise ConfigError(f"{path}.{key} is not a recognized field key")
    return OpticalField(rabi, pol, phase, detuning)


def _optical_field_dict(field: OpticalField) -> dict:
    return {
        "rabi": field.rabi,
        "polarization": _polarization_dict(field.polarization),
        "phase": field.phase,
        "detuning": field.detuning,
    }


def _units_from(data) -> UnitSystem:
    block = _mapping(data.get("units", {}), "units")
    try:
        return UnitSystem(
            mu_b_mhz_per_gauss=_number(
                block.get("mu_b_mhz_per_gauss", 1.399624),
                "units.mu_b_mhz_per_gauss",
                minimum=0.0,
                strict=True,
            ),
            gamma_hz=_number(
                block.get("gamma_hz", 5.2e6), "units.gamma_hz", minimum=0.0, strict=True
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"units: {exc}") from exc


def _scheme_from(data, units: UnitSystem) -> LevelScheme:
    block = _mapping(data.get("scheme", {}), "scheme")
    fg = _number(block.get("fg", 1.0), "scheme.fg", minimum=0.0)
    fe = _number(block.get("fe", 0.0), "scheme.fe", minimum=0.0)
    g_ground = _number(block.get("g_ground", -0.25), "scheme.g_ground")
    g_excited = _number(block.get("g_excited", 0.0), "scheme.g_excited")
    try:
        return LevelScheme(fg, fe, units.gamma_rad, g_ground, g_excited)
    except ValueError as exc:
        raise ConfigError(f"scheme: {exc}") from exc


def _environment_from(block, path) -> MagneticEnvironment:
    block = _mapping(block, path)
    mean = _vector3(_require(block, "mean_gauss", path), f"{path}.mean_gauss")
    sigma = _number(_require(block, "sigma_gauss", path), f"{path}.sigma_gauss", minimum=0.0)
    axis = _vector3(block.get("inhom_axis", "x"), f"{path}.inhom_axis")
    sampler = block.get("sampler", "gauss_hermite")
    sampler = _SAMPLER_ALIASES.get(sampler, sampler)
    if sampler not in SAMPLERS:
        raise ConfigError(f"{path}.sampler must be one of {SAMPLERS} (or gh/mc)")
    n_samples = _integer(block.get("n_samples", 21), f"{path}.n_samples", minimum=1)
    seed = _integer(block.get("seed", 0), f"{path}.seed", minimum=-(2**63))
    try:
        return MagneticEnvironment(mean, sigma, axis, sampler, n_samples, seed)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _environment_dict(env: MagneticEnvironment) -> dict:
    return {
        "mean_gauss": list(env.mean),
        "sigma_gauss": env.sigma,
        "inhom_axis": list(env.inhom_axis),
        "sampler": env.sampler,
        "n_samples": env.n_samples,
        "seed": env.seed,
    }


def _integrator_from(data) -> IntegratorConfig:
    block = _mapping(data.get("integrator", {}), "integrator")
    try:
        return IntegratorConfig(
            dt_gamma=_number(
                block.get("dt_gamma", 0.005), "integrator.dt_gamma", minimum=0.0, strict=True
            ),
            sample_stride=_integer(
                block.get("sample_stride", 63), "integrator.sample_stride", minimum=1
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved quantum storage run."""

    scheme: LevelScheme
    units: UnitSystem
    write_us: float
    read_us: float
    storage_times_us: tuple
    write_fields: tuple
    read_fields: tuple
    detect_polarization: SphericalPolarization
    environment: MagneticEnvironment
    integrator: IntegratorConfig
    combine: str = "coherent"
    output_dir: str = "out"
    sweep_gauss: tuple = ()

    def __post_init__(self) -> None:
        if self.write_us <= 0 or not math.isfinite(self.write_us):
            raise ConfigError("sequence.write_us must be > 0")
        if self.read_us <= 0 or not math.isfinite(self.read_us):
            raise ConfigError("sequence.read_us must be > 0")
        storage = tuple(float(t) for t in self.storage_times_us)
        if not storage:
            raise ConfigError("sequence.storage_times_us must be nonempty")
        for i, t in enumerate(storage):
            if not math.isfinite(t) or t < 0:
                raise ConfigError(f"sequence.storage_times_us[{i}] must be >= 0")
        if not self.write_fields:
            raise ConfigError("sequence.fields.write must be nonempty")
        if not self.read_fields:
            raise ConfigError("sequence.fields.read must be nonempty")
        if self.combine not in COMBINE_MODES:
            raise ConfigError(f"combine must be one of {COMBINE_MODES}")
        sweep = tuple(float(b) for b in self.sweep_gauss)
        for i, b in enumerate(sweep):
            if not math.isfinite(b) or b <= 0:
                raise ConfigError(f"sweep_gauss[{i}] must be > 0")
        object.__setattr__(self, "storage_times_us", storage)
        object.__setattr__(self, "write_fields", tuple(self.write_fields))
        object.__setattr__(self, "read_fields", tuple(self.read_fields))
        object.__setattr__(self, "sweep_gauss", sweep)
        object.__setattr__(self, "write_us", float(self.write_us))
        object.__setattr__(self, "read_us", float(self.read_us))
        object.__setattr__(self, "output_dir", str(self.output_dir))

    def sequence(self) -> PulseSequence:
        return PulseSequence(
            write=FieldSegment(self.write_us * 1e-6, self.write_fields),
            dark=FieldSegment(self.storage_times_us[0] * 1e-6),
            read=FieldSegment(self.read_us * 1e-6, self.read_fields),
            detect_polarization=self.detect_polarization,
        )

    def storage_seconds(self) -> np.ndarray:
        return np.asarray(self.storage_times_us) * 1e-6

    def to_dict(self) -> dict:
        out = {
            "units": {
                "mu_b_mhz_per_gauss": self.units.mu_b_mhz_per_gauss,
                "gamma_hz": self.units.gamma_hz,
            },
            "scheme": {
                "fg": self.scheme.fg.f,
                "fe": self.scheme.fe.f,
                "g_ground": self.scheme.g_ground,
                "g_excited": self.scheme.g_excited,
            },
            "sequence": {
                "write_us": self.write_us,
                "read_us": self.read_us,
                "storage_times_us": list(self.storage_times_us),
                "fields": {
                    "write": [_optical_field_dict(f) for f in self.write_fields],
                    "read": [_optical_field_dict(f) for f in self.read_fields],
                },
                "detect_polarization": _polarization_dict(self.detect_polarization),
            },
            "environment": _environment_dict(self.environment),
            "integrator": {
                "dt_gamma": self.integrator.dt_gamma,
                "sample_stride": self.integrator.sample_stride,
            },
            "combine": self.combine,
            "output_dir": self.output_dir,
        }
        if self.sweep_gauss:
            out["sweep_gauss"] = list(self.sweep_gauss)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = _mapping(data, "config")
        known = {
            "units", "scheme", "sequence", "environment",
            "integrator", "combine", "output_dir", "sweep_gauss",
        }
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown top-level key {key!r}")
        units = _units_from(data)
        scheme = _scheme_from(data, units)
        seq = _mapping(_require(data, "sequence", "config"), "sequence")
        write_us = _number(seq.get("write_us", 10.6), "sequence.write_us", 0.0, strict=True)
        read_us = _number(seq.get("read_us", 5.0), "sequence.read_us", 0.0, strict=True)
        storage_raw = _require(seq, "storage_times_us", "sequence")
        if not isinstance(storage_raw, (list, tuple)) or not storage_raw:
            raise ConfigError("sequence.storage_times_us must be a nonempty list")
        storage = tuple(
            _number(t, f"sequence.storage_times_us[{i}]", minimum=0.0)
            for i, t in enumerate(storage_raw)
        )
        fields = _mapping(_require(seq, "fields", "sequence"), "sequence.fields")
        write_raw = _require(fields, "write", "sequence.fields")
        read_raw = _require(fields, "read", "sequence.fields")
        if not isinstance(write_raw, list) or not write_raw:
            raise ConfigError("sequence.fields.write must be a nonempty list")
        if not isinstance(read_raw, list) or not read_raw:
            raise ConfigError("sequence.fields.read must be a nonempty list")
        write_fields = tuple(
            _optical_field(entry, f"sequence.fields.write[{i}]")
            for i, entry in enumerate(write_raw)
        )
        read_fields = tuple(
            _optical_field(entry, f"sequence.fields.read[{i}]")
            for i, entry in enumerate(read_raw)
        )
        detect = _polarization(
            _require(seq, "detect_polarization", "sequence"), "sequence.detect_polarization"
        )
        environment = _environment_from(_require(data, "environment", "config"), "environment")
        integrator = _integrator_from(data)
        combine = data.get("combine", "coherent")
        if combine not in COMBINE_MODES:
            raise ConfigError(f"combine must be one of {COMBINE_MODES}, got {combine!r}")
        sweep_raw = data.get("sweep_gauss", [])
        if not isinstance(sweep_raw, (list, tuple)):
            raise ConfigError("sweep_gauss must be a list")
        sweep = tuple(
            _number(b, f"sweep_gauss[{i}]", minimum=0.0, strict=True)
            for i, b in enumerate(sweep_raw)
        )
        output_dir = data.get("output_dir", "out")
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError("output_dir must be a nonempty string")
        return cls(
            scheme=scheme,
            units=units,
            write_us=write_us,
            read_us=read_us,
            storage_times_us=storage,
            write_fields=write_fields,
            read_fields=read_fields,
            detect_polarization=detect,
            environment=environment,
            integrator=integrator,
            combine=combine,
            output_dir=output_dir,
            sweep_gauss=sweep,
        )


CLASSICAL_CASES = ("custom", "none", "x", "y", "z")


@dataclass(frozen=True)
class ClassicalConfig:
    """Classical precessing-dipole run.

    ``cases`` selects mean-field orientations: "custom" keeps the
    environment's mean as given; "none" zeroes it; "x"/"y"/"z" point it
    along that axis with magnitude ``case_magnitude_gauss``.
    """

    environment: MagneticEnvironment
    gyro_rad_per_s_gauss: float
    mu0: tuple = (0.0, 1.0, 0.0)
    t_max_us: float = 40.0
    n_times: int = 1601
    cases: tuple = ("custom",)
    case_magnitude_gauss: float = 0.0
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if not math.isfinite(self.gyro_rad_per_s_gauss) or self.gyro_rad_per_s_gauss == 0:
            raise ConfigError("classical.gyro_rad_per_s_gauss must be finite and nonzero")
        if not math.isfinite(self.t_max_us) or self.t_max_us <= 0:
            raise ConfigError("classical.t_max_us must be > 0")
        if self.n_times < 2:
            raise ConfigError("classical.n_times must be >= 2")
        cases = tuple(self.cases)
        if not cases:
            raise ConfigError("classical.cases must be nonempty")
        for case in cases:
            if case not in CLASSICAL_CASES:
                raise ConfigError(
                    f"classical.cases entries must be among {CLASSICAL_CASES}, got {case!r}"
                )
        needs_magnitude = any(case in ("x", "y", "z") for case in cases)
        if needs_magnitude and self.case_magnitude_gauss <= 0:
            raise ConfigError(
                "classical.case_magnitude_gauss must be > 0 when axis cases are used"
            )
        object.__setattr__(self, "mu0", tuple(float(c) for c in self.mu0))
        object.__setattr__(self, "cases", cases)

    def times_seconds(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max_us * 1e-6, self.n_times)

    def case_environment(self, case: str) -> MagneticEnvironment:
        if case == "custom":
            return self.environment
        if case == "none":
            mean = (0.0, 0.0, 0.0)
        else:
            mean = tuple(
                self.case_magnitude_gauss * c for c in _AXIS_TOKENS[case]
            )
        return MagneticEnvironment(
            mean,
            self.environment.sigma,
            self.environment.inhom_axis,
            self.environment.sampler,
            self.environment.n_samples,
            self.environment.seed,
        )

    def to_dict(self) -> dict:
        return {
            "classical": {
                "environment": _environment_dict(self.environment),
                "gyro_rad_per_s_gauss": self.gyro_rad_per_s_gauss,
                "mu0": list(self.mu0),
                "t_max_us": self.t_max_us,
                "n_times": self.n_times,
                "cases": list(self.cases),
                "case_magnitude_gauss": self.case_magnitude_gauss,
                "output_dir": self.output_dir,
            }
        }

    @classmethod
    def from_dict(cls, block: dict) -> "ClassicalConfig":
        block = _mapping(block, "classical")
        known = {
            "environment", "gyro_rad_per_s_gauss", "mu0", "t_max_us",
            "n_times", "cases", "case_magnitude_gauss", "output_dir",
        }
        for key in block:
            if key not in known:
                raise ConfigError(f"unknown key classical.{key!r}")
        environment = _environment_from(
            _require(block, "environment", "classical"), "classical.environment"
        )
        gyro = _number(
            _require(block, "gyro_rad_per_s_gauss", "classical"),
            "classical.gyro_rad_per_s_gauss",
            allow_zero=False,
        )
        mu0 = _vector3(block.get("mu0", "y"), "classical.mu0")
        t_max_us = _number(block.get("t_max_us", 40.0), "classical.t_max_us", 0.0, strict=True)
        n_times = _integer(block.get("n_times", 1601), "classical.n_times", minimum=2)
        cases_raw = block.get("cases", ["custom"])
        if not isinstance(cases_raw, (list, tuple)):
            raise ConfigError("classical.cases must be a list")
        magnitude = _number(
            block.get("case_magnitude_gauss", 0.0), "classical.case_magnitude_gauss", minimum=0.0
        )
        output_dir = block.get("output_dir", "out")
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError("classical.output_dir must be a nonempty string")
        return cls(
            environment=environment,
            gyro_rad_per_s_gauss=gyro,
            mu0=mu0,
            t_max_us=t_max_us,
            n_times=n_times,
            cases=tuple(cases_raw),
            case_magnitude_gauss=magnitude,
            output_dir=output_dir,
        )


def parse_config(text: str):
    """Parse YAML text into a RunConfig or ClassicalConfig."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    if "classical" in data:
        extra = set(data) - {"classical"}
        if extra:
            raise ConfigError(
                f"classical configs allow only the 'classical' key, found {sorted(extra)}"
            )
        return ClassicalConfig.from_dict(data["classical"])
    return RunConfig.from_dict(data)


def load_config(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


def serialize_config(config) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=None)


def _standard_quantum_preset(mean, circular=False) -> RunConfig:
    units = UnitSystem()
    scheme = LevelScheme(1.0, 0.0, units.gamma_rad, -0.25)
    if circular:
        write = (
            OpticalField(0.5, SphericalPolarization.sigma_minus()),
            OpticalField(0.25, SphericalPolarization.sigma_plus()),
        )
        read = (OpticalField(0.125, SphericalPolarization.sigma_plus()),)
        detect = SphericalPolarization.sigma_minus()
    else:
        write = (
            OpticalField(0.5, SphericalPolarization.linear_x()),
            OpticalField(0.25, SphericalPolarization.linear_y()),
        )
        read = (OpticalField(0.125, SphericalPolarization.linear_y()),)
        detect = SphericalPolarization.linear_x()
    return RunConfig(
        scheme=scheme,
        units=units,
        write_us=10.6,
        read_us=5.0,
        storage_times_us=tuple(0.5 * k for k in range(1, 81)),
        write_fields=write,
        read_fields=read,
        detect_polarization=detect,
        environment=MagneticEnvironment(
            mean=mean,
            sigma=units.field_for_zeeman(-0.25, 5e-3),
            inhom_axis=(1.0, 0.0, 0.0),
            sampler="gauss_hermite",
            n_samples=21,
            seed=0,
        ),
        integrator=IntegratorConfig(),
        combine="coherent",
        output_dir="out",
    )


def build_preset(name: str):
    """Named configurations reproducing the reference scenarios."""
    units = UnitSystem()
    b_main = units.field_for_zeeman(-0.25, 2e-2)
    sigma = units.field_for_zeeman(-0.25, 5e-3)
    if name == "fig4":
        return _standard_quantum_preset((0.0, 0.0, 0.0))
    if name == "fig5":
        return _standard_quantum_preset((b_main, 0.0, 0.0))
    if name == "fig6":
        return _standard_quantum_preset((0.0, b_main, 0.0))
    if name == "circular":
        return _standard_quantum_preset((b_main, 0.0, 0.0), circular=True)
    if name == "fig3":
        # Circular write pair: its peak series carries the precession
        # fundamental alongside the dominant second harmonic, which the
        # sweep needs to track the Larmor line itself.
        base = _standard_quantum_preset((0.0, 1.0, 0.0), circular=True)
        env = MagneticEnvironment(
            mean=(0.0, 1.0, 0.0),
            sigma=0.0,
            inhom_axis=(1.0, 0.0, 0.0),
            sampler="gauss_hermite",
            n_samples=1,
            seed=0,
        )
        return RunConfig(
            scheme=base.scheme,
            units=base.units,
            write_us=base.write_us,
            read_us=base.read_us,
            storage_times_us=tuple(0.25 * k for k in range(1, 161)),
            write_fields=base.write_fields,
            read_fields=base.read_fields,
            detect_polarization=base.detect_polarization,
            environment=env,
            integrator=base.integrator,
            combine="coherent",
            output_dir="out",
            sweep_gauss=(0.4, 0.6, 0.8, 1.0, 1.2),
        )
    if name == "fig7":
        return ClassicalConfig(
            environment=MagneticEnvironment(
                mean=(0.0, 0.0, 0.0),
                sigma=sigma,
                inhom_axis=(1.0, 0.0, 0.0),
                sampler="gauss_hermite",
                n_samples=41,
                seed=0,
            ),
            gyro_rad_per_s_gauss=0.25 * units.mu_b_rad_per_gauss,
            mu0=(0.0, 1.0, 0.0),
            t_max_us=40.0,
            n_times=1601,
            cases=("none", "x", "z", "y"),
            case_magnitude_gauss=4.0 * sigma,
            output_dir="out",
        )
    raise ConfigError(f"unknown preset {name!r} (choose from {', '.join(PRESET_NAMES)})")
