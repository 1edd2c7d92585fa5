"""Light storage in ground-state Zeeman coherences.

Density-matrix simulation of a degenerate two-level atom driven through
a write / dark / read pulse sequence in a static magnetic field, plus a
classical precessing-dipole model, ensemble averaging over field
inhomogeneity, and analysis helpers for the retrieved signals.
"""

__version__ = "0.1.0"

from .analysis import (
    AnalysisError,
    FitReport,
    LineFit,
    PeakSeries,
    SpectrumReport,
    dominant_frequencies,
    fundamental_frequency,
    extract_peaks,
    fit_envelope,
    linear_fit,
)
from .angular import (
    AngularMomentum,
    LevelScheme,
    SphericalPolarization,
    angular_momentum_matrices,
    dipole_coupling,
    spherical_components,
)
from .config import (
    PRESET_NAMES,
    ClassicalConfig,
    ConfigError,
    RunConfig,
    build_preset,
    load_config,
    parse_config,
    serialize_config,
)
from .dipoles import DipoleEnsemble, MomentTrajectory, precess, total_moment
from .dynamics import (
    DarkEvolution,
    FieldSegment,
    IntegratorConfig,
    NumericalError,
    OpticalField,
    PulseSequence,
    RetrievedTrace,
    UnitSystem,
    build_hamiltonian,
    dark_propagator,
    larmor_frequency,
    lindblad_derivative,
    projected_coherence,
    propagate_segment,
    run_storage_sequence,
    sequence_traces,
)
from .ensemble import (
    EnsembleResult,
    MagneticEnvironment,
    run_ensemble,
    sample_fields,
)
from .runio import (
    intensity_scale,
    read_csv_columns,
    traces_from_columns,
    write_classical_csv,
    write_manifest,
    write_peaks_csv,
    write_sweep_csv,
    write_traces_csv,
)

__all__ = [
    "AngularMomentum",
    "AnalysisError",
    "ClassicalConfig",
    "ConfigError",
    "DarkEvolution",
    "DipoleEnsemble",
    "EnsembleResult",
    "FieldSegment",
    "FitReport",
    "IntegratorConfig",
    "LevelScheme",
    "LineFit",
    "MagneticEnvironment",
    "MomentTrajectory",
    "NumericalError",
    "OpticalField",
    "PRESET_NAMES",
    "PeakSeries",
    "PulseSequence",
    "RetrievedTrace",
    "RunConfig",
    "SpectrumReport",
    "SphericalPolarization",
    "UnitSystem",
    "angular_momentum_matrices",
    "build_hamiltonian",
    "build_preset",
    "dark_propagator",
    "dipole_coupling",
    "dominant_frequencies",
    "fundamental_frequency",
    "extract_peaks",
    "fit_envelope",
    "intensity_scale",
    "larmor_frequency",
    "lindblad_derivative",
    "linear_fit",
    "load_config",
    "parse_config",
    "precess",
    "projected_coherence",
    "propagate_segment",
    "read_csv_columns",
    "run_ensemble",
    "run_storage_sequence",
    "sample_fields",
    "sequence_traces",
    "serialize_config",
    "spherical_components",
    "total_moment",
    "traces_from_columns",
    "write_classical_csv",
    "write_manifest",
    "write_peaks_csv",
    "write_sweep_csv",
    "write_traces_csv",
]
