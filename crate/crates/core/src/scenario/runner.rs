use std::path::PathBuf;
use std::sync::Arc;

use super::config::{IcKind, MeshSpec, ModelKind, ScenarioConfig};
use super::diagnostics::{binary_diagnostics, ternary_diagnostics, DiagnosticsRecord};
use super::ic::{cosine_ic, linear_ramp_ic, random_two_phase_ic, uniform_ic};
use super::output::{write_diagnostics_csv, write_metadata};
use super::vtk::write_snapshot;
use crate::energy::{FreeEnergyModel, TwoPhaseParams, VacancyEnergyParams};
use crate::error::{Error, Result};
use crate::lagrangian::{BinaryStepProblem, Diffusivity, Discretization, TernaryStepProblem};
use crate::mesh_fem::{build_interval_mesh, build_unit_square_mesh, Field, Mesh};
use crate::solver::{time_march, MarchStatus, NewtonConfig, TimeMarchConfig};

/// Outcome of one scenario run, with everything the acceptance checks and
/// the C interface need without re-reading the artifacts.
#[derive(Debug)]
pub struct RunSummary {
    pub completed: bool,
    pub abort_reason: Option<String>,
    pub steps: usize,
    pub final_time: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: Vec<f64>,
    pub disc: Arc<Discretization>,
    /// Largest relative drift of the conserved total over the run
    /// (the alloy fraction for binary models; vacancies make every ternary
    /// component non-conserved, so ternary runs report the x1 drift for
    /// information only).
    pub mass_drift_rel: f64,
    pub min_entropy_production: f64,
    pub total_newton_iterations: usize,
    pub output_dir: PathBuf,
}

/// Solver-unit two-phase parameters of a configuration.
pub fn scaled_two_phase(config: &ScenarioConfig) -> TwoPhaseParams {
    let e = &config.energy;
    TwoPhaseParams {
        x_alpha: e.x_alpha,
        x_beta: e.x_beta,
        f_alpha: e.f_alpha,
        f_beta: e.f_beta,
        curvature: e.curvature,
        interface_energy: e.interface_energy,
        gradient_coeff: e.kappa,
    }
    .scaled(e.energy_scale)
}

fn build_mesh(config: &ScenarioConfig) -> Result<Arc<Mesh>> {
    Ok(match config.mesh {
        MeshSpec::Interval { cells, length } => Arc::new(build_interval_mesh(cells, length)?),
        MeshSpec::Square { nx, ny } => Arc::new(build_unit_square_mesh(nx, ny)?),
    })
}

fn initial_fraction(config: &ScenarioConfig, space: &Arc<crate::mesh_fem::FunctionSpace>) -> Result<Field> {
    match config.ic {
        IcKind::LinearRamp => linear_ramp_ic(space),
        IcKind::RandomTwoPhase { beta_fraction } => {
            random_two_phase_ic(space, config.seed, beta_fraction)
        }
        IcKind::Uniform { value } => uniform_ic(space, value),
        IcKind::Cosine { amplitude } => cosine_ic(space, amplitude),
    }
}

/// Runs a scenario end to end, writing the metadata, snapshot and
/// diagnostics artifacts into the configured output directory.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunSummary> {
    config.validate()?;
    let newton = NewtonConfig::default();
    let out_dir = config.output_dir.clone();
    std::fs::create_dir_all(&out_dir)
        .map_err(|source| Error::Io { path: out_dir.clone(), source })?;
    write_metadata(config, &newton, &out_dir.join("metadata.cfg"))?;

    let mesh = build_mesh(config)?;
    let march = TimeMarchConfig {
        dt: config.time.dt,
        t_end: config.time.t_end,
        snapshot_stride: config.time.snapshot_stride,
        max_dt_retries: 4,
    };

    match config.model {
        ModelKind::TernaryVacancy => run_ternary(config, mesh, &march, &newton, out_dir),
        _ => run_binary(config, mesh, &march, &newton, out_dir),
    }
}

/// The free-energy model of a binary configuration, in solver units.
pub fn binary_energy_model(config: &ScenarioConfig) -> Result<FreeEnergyModel> {
    let params = scaled_two_phase(config);
    match config.model {
        ModelKind::CahnHilliard => FreeEnergyModel::double_well(params),
        ModelKind::CaseI | ModelKind::CaseII => FreeEnergyModel::convex_hull(params),
        ModelKind::SingleQuadratic => FreeEnergyModel::single_quadratic(
            config.energy.curvature * config.energy.energy_scale,
            config.energy.x_eq,
        ),
        ModelKind::TernaryVacancy => Err(Error::invalid("not a binary model")),
    }
}

fn run_binary(
    config: &ScenarioConfig,
    mesh: Arc<Mesh>,
    march: &TimeMarchConfig,
    newton: &NewtonConfig,
    out_dir: PathBuf,
) -> Result<RunSummary> {
    let energy = binary_energy_model(config)?;
    let scalar = Arc::new(crate::mesh_fem::build_function_space(mesh.clone(), 1)?);
    let ic = initial_fraction(config, &scalar)?;
    let dissipation_curvature = energy.dissipation_curvature();
    let mut problem = BinaryStepProblem::new(
        mesh,
        energy,
        dissipation_curvature,
        Diffusivity::Constant(config.transport.d_tilde),
        config.time.dt,
        ic.coeffs().to_vec(),
    )?;
    run_march(&mut problem, march, newton, out_dir, false)
}

fn run_march<P>(
    problem: &mut P,
    march: &TimeMarchConfig,
    newton: &NewtonConfig,
    out_dir: PathBuf,
    ternary: bool,
) -> Result<RunSummary>
where
    P: crate::solver::IncrementalProblem + HasDiagnostics,
{
    let disc = problem.discretization();
    write_snapshot(&disc, &problem.initial_state(), &out_dir.join("snapshot_000000.vtk"))?;
    let stride = march.snapshot_stride;
    let dir_for_obs = out_dir.clone();
    let disc_for_obs = disc.clone();
    let trajectory = time_march(
        problem,
        march,
        newton,
        |p, _idx, t, state, report| p.diagnostics(t, state, report.iterations),
        move |idx, _t, state, _rec: &DiagnosticsRecord| {
            if stride > 0 && idx % stride == 0 {
                let path = dir_for_obs.join(format!("snapshot_{idx:06}.vtk"));
                let _ = write_snapshot(&disc_for_obs, state, &path);
            }
        },
    )?;

    let records: Vec<DiagnosticsRecord> =
        trajectory.steps.iter().map(|s| s.record.clone()).collect();
    write_diagnostics_csv(&records, ternary, &out_dir.join("diagnostics.csv"))?;

    let (completed, abort_reason) = match &trajectory.status {
        MarchStatus::Completed => (true, None),
        MarchStatus::Aborted { reason, .. } => (false, Some(reason.clone())),
    };
    let mass0 = records.first().map_or(0.0, |r| r.mass_total);
    let mass_drift_rel = records
        .iter()
        .map(|r| (r.mass_total - mass0).abs())
        .fold(0.0f64, f64::max)
        / mass0.abs().max(1e-300);
    let min_xi = records
        .iter()
        .map(|r| r.min_entropy_production)
        .fold(f64::INFINITY, f64::min);
    let final_time = records.last().map_or(0.0, |r| r.time);
    // final snapshot for completeness
    write_snapshot(&disc, &trajectory.final_state, &out_dir.join("snapshot_final.vtk"))?;
    Ok(RunSummary {
        completed,
        abort_reason,
        steps: records.len(),
        final_time,
        total_newton_iterations: records.iter().map(|r| r.newton_iterations).sum(),
        records,
        final_state: trajectory.final_state,
        disc,
        mass_drift_rel,
        min_entropy_production: min_xi,
        output_dir: out_dir,
    })
}

fn run_ternary(
    config: &ScenarioConfig,
    mesh: Arc<Mesh>,
    march: &TimeMarchConfig,
    newton: &NewtonConfig,
    out_dir: PathBuf,
) -> Result<RunSummary> {
    let scale = config.energy.energy_scale;
    let hull = scaled_two_phase(config);
    let vacancy = VacancyEnergyParams {
        curvature: config.energy.vacancy_curvature * scale,
        x_eq: config.energy.x0_eq,
    };
    let disc = Arc::new(Discretization::new(mesh.clone(), &crate::lagrangian::TERNARY_FIELDS)?);
    let ic1 = initial_fraction(config, &disc.scalar)?;
    let ic0 = uniform_ic(&disc.scalar, config.energy.x0_eq)?;
    let mut problem = TernaryStepProblem::new(
        mesh,
        hull,
        vacancy,
        config.transport.d0,
        config.transport.d1,
        config.transport.d2,
        config.energy.k1 * scale,
        config.energy.k2 * scale,
        config.transport.a_phi / scale,
        config.time.dt,
        ic0.coeffs().to_vec(),
        ic1.coeffs().to_vec(),
    )?;
    run_march(&mut problem, march, newton, out_dir, true)
}

/// Per-model diagnostics hook for the shared march driver.
pub trait HasDiagnostics {
    fn discretization(&self) -> Arc<Discretization>;
    fn diagnostics(&self, time: f64, state: &[f64], newton_iterations: usize)
        -> DiagnosticsRecord;
}

impl HasDiagnostics for BinaryStepProblem {
    fn discretization(&self) -> Arc<Discretization> {
        self.disc.clone()
    }
    fn diagnostics(&self, time: f64, state: &[f64], iters: usize) -> DiagnosticsRecord {
        binary_diagnostics(self, time, state, iters)
    }
}

impl HasDiagnostics for TernaryStepProblem {
    fn discretization(&self) -> Arc<Discretization> {
        self.disc.clone()
    }
    fn diagnostics(&self, time: f64, state: &[f64], iters: usize) -> DiagnosticsRecord {
        ternary_diagnostics(self, time, state, iters)
    }
}
