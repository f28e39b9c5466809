use super::linear::SparseLu;
use crate::error::{Error, Result};
use crate::lagrangian::AssembledSystem;

/// Damped Newton settings.
#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Absolute tolerance on the max-norm of the residual.
    pub abs_tol: f64,
    /// Relative tolerance against the initial residual.
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Backtracking halvings per iteration; a step is accepted only when it
    /// decreases the residual norm.
    pub max_halvings: u32,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { abs_tol: 1e-10, rel_tol: 1e-8, max_iterations: 25, max_halvings: 8 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("Newton tolerances must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("Newton needs at least one iteration"));
        }
        Ok(())
    }
}

/// Convergence report of one nonlinear solve.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm residual before each iteration and after the last.
    pub residual_history: Vec<f64>,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Reciprocal row maxima of the Jacobian, used to weigh the residual
/// blocks comparably in the line-search merit. The monolithic systems mix
/// energy-scaled rows with constraint rows many orders of magnitude
/// smaller; an unweighted norm would let the energy block veto steps that
/// settle the constraints.
fn row_scales(sys: &AssembledSystem) -> Vec<f64> {
    let j = &sys.jacobian;
    (0..j.n)
        .map(|row| {
            let m = j.values[j.row_ptr[row]..j.row_ptr[row + 1]]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if m > 0.0 && m.is_finite() {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect()
}

fn scaled_l2(r: &[f64], s: &[f64]) -> f64 {
    r.iter().zip(s).map(|(v, w)| (v * w) * (v * w)).sum::<f64>().sqrt()
}

fn scaled_inf(r: &[f64], s: &[f64]) -> f64 {
    r.iter().zip(s).fold(0.0f64, |m, (v, w)| m.max((v * w).abs()))
}

/// Damped Newton iteration on an assembled residual/Jacobian.
///
/// Residual norms (for both the convergence test and the line-search
/// merit) are row-equilibrated by the Jacobian row maxima, which makes the
/// tolerances dimensionless: energy-scaled equation blocks and order-one
/// constraint blocks are measured against their own magnitudes.
pub fn newton_solve(
    mut assemble: impl FnMut(&[f64]) -> Result<AssembledSystem>,
    initial: &[f64],
    config: &NewtonConfig,
    lu: &mut SparseLu,
) -> Result<(Vec<f64>, NewtonReport)> {
    config.validate()?;
    let mut u = initial.to_vec();
    let mut sys = assemble(&u)?;
    let r0 = scaled_inf(&sys.residual, &row_scales(&sys));
    if !r0.is_finite() {
        return Err(Error::invalid("initial residual is not finite"));
    }
    let target = config.abs_tol.max(config.rel_tol * r0);
    let mut history = vec![r0];

    // Piecewise-quadratic energies make the step equations semismooth: an
    // iterate crossing a hull kink spikes the residual transiently even
    // though the re-linearized system then solves exactly. When no damped
    // step decreases the merit, the full step is taken anyway, bounded by
    // a watchdog on consecutive non-improving accepts.
    let max_nonmonotone = 4u32;
    let mut nonmonotone_streak = 0u32;

    for it in 0..config.max_iterations {
        if history[it] <= target {
            return Ok((u, NewtonReport { iterations: it, residual_history: history }));
        }
        let neg_r: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
        let step = lu.solve_relaxed(&sys.jacobian, &neg_r)?;

        let scales = row_scales(&sys);
        let merit = scaled_l2(&sys.residual, &scales);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + alpha * d).collect();
            let trial_sys = assemble(&trial)?;
            let trial_merit = scaled_l2(&trial_sys.residual, &scales);
            if trial_merit.is_finite() && trial_merit < merit {
                accepted = Some((trial, trial_sys));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, trial_sys)) => {
                nonmonotone_streak = 0;
                u = trial;
                sys = trial_sys;
            }
            None => {
                nonmonotone_streak += 1;
                if nonmonotone_streak > max_nonmonotone {
                    return Err(Error::NonConvergence {
                        iterations: it,
                        history,
                        last_state: u,
                    });
                }
                let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + d).collect();
                let trial_sys = assemble(&trial)?;
                if !norm_inf(&trial_sys.residual).is_finite() {
                    return Err(Error::NonConvergence {
                        iterations: it,
                        history,
                        last_state: u,
                    });
                }
                u = trial;
                sys = trial_sys;
            }
        }
        history.push(scaled_inf(&sys.residual, &row_scales(&sys)));
    }
    let last = *history.last().expect("non-empty");
    if last <= target {
        let iterations = history.len() - 1;
        return Ok((u, NewtonReport { iterations, residual_history: history }));
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        history,
        last_state: u,
    })
}
