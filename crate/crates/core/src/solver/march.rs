use super::linear::SparseLu;
use super::newton::{newton_solve, NewtonConfig, NewtonReport};
use crate::error::{Error, Result};
use crate::lagrangian::AssembledSystem;

/// Backward time-march settings.
#[derive(Debug, Clone)]
pub struct TimeMarchConfig {
    pub dt: f64,
    pub t_end: f64,
    /// A full state snapshot is kept every this many accepted steps.
    pub snapshot_stride: usize,
    /// Consecutive step halvings tried when a step fails to converge.
    pub max_dt_retries: u32,
}

impl TimeMarchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::invalid("need 0 < dt <= t_end"));
        }
        Ok(())
    }
}

/// An incremental (one-step) variational problem the march can advance.
pub trait IncrementalProblem {
    fn n_dofs(&self) -> usize;
    /// State vector at the start of the march (previous fields carried into
    /// the unknown blocks, fluxes and multipliers zero).
    fn initial_state(&self) -> Vec<f64>;
    fn assemble(&self, u: &[f64]) -> Result<AssembledSystem>;
    fn dt(&self) -> f64;
    fn set_dt(&mut self, dt: f64);
    /// Accepts a converged state as the new previous step.
    fn advance(&mut self, state: &[f64]);
}

/// One accepted step of a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryStep<R> {
    pub time: f64,
    /// Full state, kept on snapshot strides (and always for the final step).
    pub state: Option<Vec<f64>>,
    pub record: R,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarchStatus {
    Completed,
    Aborted { at_time: f64, reason: String },
}

/// Accepted steps with strictly increasing times plus the final status.
#[derive(Debug)]
pub struct Trajectory<R> {
    pub steps: Vec<TrajectoryStep<R>>,
    pub status: MarchStatus,
    pub final_state: Vec<f64>,
}

/// Marches the incremental problem with backward steps.
///
/// Every accepted step is Newton-converged; on failure the step is retried
/// with halved increments up to `max_dt_retries` times before aborting with
/// the partial trajectory. `record` computes the per-step diagnostics;
/// `observer` sees every accepted state.
pub fn time_march<P, R>(
    problem: &mut P,
    march: &TimeMarchConfig,
    newton: &NewtonConfig,
    mut record: impl FnMut(&P, usize, f64, &[f64], &NewtonReport) -> R,
    mut observer: impl FnMut(usize, f64, &[f64], &R),
) -> Result<Trajectory<R>>
where
    P: IncrementalProblem,
{
    march.validate()?;
    newton.validate()?;
    let nominal_dt = march.dt;
    let mut lu = SparseLu::new();
    let mut u = problem.initial_state();
    let mut t = 0.0;
    let mut steps = Vec::new();
    let mut index = 0usize;
    let eps = 1e-12 * march.t_end;

    while t < march.t_end - eps {
        let remaining = march.t_end - t;
        problem.set_dt(nominal_dt.min(remaining));
        let mut attempt = 0u32;
        let outcome = loop {
            match newton_solve(|v| problem.assemble(v), &u, newton, &mut lu) {
                Ok(ok) => break Ok(ok),
                Err(err) => {
                    if attempt >= march.max_dt_retries {
                        break Err(err);
                    }
                    attempt += 1;
                    problem.set_dt(nominal_dt.min(remaining) / f64::powi(2.0, attempt as i32));
                }
            }
        };
        match outcome {
            Ok((state, report)) => {
                t += problem.dt();
                index += 1;
                problem.advance(&state);
                let rec = record(problem, index, t, &state, &report);
                observer(index, t, &state, &rec);
                let keep = march.snapshot_stride > 0 && index % march.snapshot_stride == 0;
                steps.push(TrajectoryStep {
                    time: t,
                    state: keep.then(|| state.clone()),
                    record: rec,
                });
                u = state;
            }
            Err(err) => {
                return Ok(Trajectory {
                    steps,
                    status: MarchStatus::Aborted { at_time: t, reason: err.to_string() },
                    final_state: u,
                });
            }
        }
    }
    Ok(Trajectory { steps, status: MarchStatus::Completed, final_state: u })
}
