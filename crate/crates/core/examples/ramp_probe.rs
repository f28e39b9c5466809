//! Compares ramp initial conditions for the 1-D scenarios.

use diffusim::energy::{FreeEnergyModel, TwoPhaseParams};
use diffusim::lagrangian::{binary_mesh_1d, BinaryStepProblem, Diffusivity};
use diffusim::scenario::{binary_diagnostics, interface_width};
use diffusim::mesh_fem::{build_function_space, interpolate, Field};
use diffusim::solver::{time_march, NewtonConfig, TimeMarchConfig};
use std::sync::Arc;

fn run(tag: &str, kappa: f64, bump: bool, ramp_lo: f64, ramp_hi: f64) {
    let scale = 1e5;
    let n_cells = 200;
    let params =
        TwoPhaseParams { gradient_coeff: kappa, ..TwoPhaseParams::default() }.scaled(scale);
    let energy = if bump {
        FreeEnergyModel::double_well(params).unwrap()
    } else {
        FreeEnergyModel::convex_hull(params).unwrap()
    };
    let mesh = binary_mesh_1d(n_cells, 1.0).unwrap();
    let space = Arc::new(build_function_space(mesh.clone(), 1).unwrap());
    let ic = interpolate(&space, |p| ramp_lo + (ramp_hi - ramp_lo) * p[0]).unwrap();
    let mut problem = BinaryStepProblem::new(
        mesh,
        energy,
        params.curvature,
        Diffusivity::Constant(1.0),
        1e-3,
        ic.coeffs().to_vec(),
    )
    .unwrap();
    let march = TimeMarchConfig { dt: 1e-3, t_end: 0.2, snapshot_stride: 0, max_dt_retries: 4 };
    let traj = time_march(
        &mut problem,
        &march,
        &NewtonConfig::default(),
        |p, _i, t, state, rep| binary_diagnostics(p, t, state, rep.iterations),
        |_, _, _, _: &diffusim::scenario::DiagnosticsRecord| {},
    )
    .unwrap();
    let xs = problem.disc.layout.slice("x", &traj.final_state).to_vec();
    let f = Field::new(problem.disc.scalar.clone(), xs.clone()).unwrap();
    let w = interface_width(&f, 0.30, 0.70).map(|v| format!("{v:.5}")).unwrap_or("n/a".into());
    let (mn, mx) = xs.iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let last = traj.steps.last().unwrap();
    println!(
        "{tag} ramp {ramp_lo}->{ramp_hi}: status {:?} width {w} min {mn:.5} max {mx:.5} mass {:.6}",
        traj.status, last.record.mass_total
    );
}

fn main() {
    for (lo, hi) in [(0.0, 1.0), (0.25, 0.75)] {
        run("fig3 hull k=0 ", 0.0, false, lo, hi);
        run("fig2 dw   k=5 ", 5.0, true, lo, hi);
        run("fig4 hull k=5 ", 5.0, false, lo, hi);
    }
}
