//! Scenario configuration, presets, initial conditions, diagnostics and
//! file output: the reproducibility surface of the solver.

mod config;
mod diagnostics;
mod ic;
mod output;
mod preset;
mod runner;
mod vtk;

pub use config::{
    parse_config, EnergyConfig, IcKind, MeshSpec, ModelKind, ScenarioConfig, TimeConfig,
    TransportConfig,
};
pub use diagnostics::{
    binary_diagnostics, interface_width, ternary_diagnostics, DiagnosticsRecord,
    TernaryDiagnostics, WIDTH_HI, WIDTH_LO,
};
pub use ic::{cosine_ic, linear_ramp_ic, random_two_phase_ic, uniform_ic};
pub use output::{write_diagnostics_csv, write_metadata};
pub use preset::{preset, PRESET_NAMES};
pub use runner::{binary_energy_model, run_scenario, scaled_two_phase, HasDiagnostics, RunSummary};
pub use vtk::{write_field, write_snapshot};
