//! Scratch probe for Newton behavior on the sharp-interface scenario.

use diffusim::energy::{FreeEnergyModel, TwoPhaseParams};
use diffusim::lagrangian::{binary_mesh_1d, BinaryStepProblem, Diffusivity};
use diffusim::solver::{IncrementalProblem, SparseLu};

fn block_norms(p: &BinaryStepProblem, r: &[f64]) -> (f64, f64, f64) {
    let inf = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (
        inf(p.disc.layout.slice("x", r)),
        inf(p.disc.layout.slice("j", r)),
        inf(p.disc.layout.slice("mu", r)),
    )
}

fn main() {
    let scale = 1e5;
    let n_cells = 200;
    let params = TwoPhaseParams { gradient_coeff: 100.0, ..TwoPhaseParams::default() }.scaled(scale);
    let energy = FreeEnergyModel::double_well(params).unwrap();
    let n = 2 * n_cells + 1;
    let mesh = binary_mesh_1d(n_cells, 1.0).unwrap();
    // nodal coordinates of the scalar space: vertices then midpoints
    let mut coords = vec![0.0; n];
    for v in 0..=n_cells {
        coords[v] = v as f64 / n_cells as f64;
    }
    for c in 0..n_cells {
        coords[n_cells + 1 + c] = (c as f64 + 0.5) / n_cells as f64;
    }
    let prev: Vec<f64> = coords.clone();
    let mut p = BinaryStepProblem::new(
        mesh,
        energy,
        params.curvature,
        Diffusivity::Constant(1.0),
        1e-3,
        prev,
    )
    .unwrap();

    let mut lu = SparseLu::new();
    let mut u = p.initial_state();
    for step in 0..3 {
        // manual damped newton with diagnostics
        let mut sys = p.assemble(&u).unwrap();
        let mut merit: f64 = sys.residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!("step {step}: start blocks {:?}", block_norms(&p, &sys.residual));
        let _ = &mut merit;
        for it in 0..40 {
            let rinf = sys.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if rinf < 1e-10 * scale.max(1.0) {
                println!("  converged at it {it}: rinf {rinf:.3e}");
                break;
            }
            // pure full-step semismooth Newton
            let neg: Vec<f64> = sys.residual.iter().map(|v| -v).collect();
            let d = lu.solve(&sys.jacobian, &neg).unwrap();
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + b).collect();
            u = trial;
            sys = p.assemble(&u).unwrap();
            let (bx, bj, bm) = block_norms(&p, &sys.residual);
            println!("  it {it}: blocks x {bx:.3e} j {bj:.3e} mu {bm:.3e}");
            if it == 39 {
                println!("  NOT CONVERGED IN 40");
            }
        }
        p.advance(&u);
    }
}
