use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh_fem::{interpolate, Field, FunctionSpace};

/// Linearly rising mole fraction, 0 at the left end to 1 at the right.
pub fn linear_ramp_ic(space: &Arc<FunctionSpace>) -> Result<Field> {
    if space.mesh().dimension() != 1 || space.components() != 1 {
        return Err(Error::invalid("linear ramp needs a 1-D scalar space"));
    }
    let length = space
        .mesh()
        .vertex(space.mesh().n_vertices() - 1)[0];
    interpolate(space, |p| p[0] / length)
}

/// Uniform composition.
pub fn uniform_ic(space: &Arc<FunctionSpace>, value: f64) -> Result<Field> {
    interpolate(space, |_| value)
}

/// Small cosine perturbation around one half, the linear-diffusion
/// reference state.
pub fn cosine_ic(space: &Arc<FunctionSpace>, amplitude: f64) -> Result<Field> {
    if space.mesh().dimension() != 1 {
        return Err(Error::invalid("cosine initial condition needs a 1-D space"));
    }
    let length = space.mesh().vertex(space.mesh().n_vertices() - 1)[0];
    interpolate(space, move |p| 0.5 + amplitude * (PI * p[0] / length).cos())
}

/// Fully separated random two-phase pattern: a seeded band-limited cosine
/// mixture (wavelength one eighth of the domain) thresholded at the
/// quantile that puts `beta_fraction` of the nodes at one.
///
/// Deterministic in the seed; nodal values are exactly zero or one.
pub fn random_two_phase_ic(
    space: &Arc<FunctionSpace>,
    seed: u64,
    beta_fraction: f64,
) -> Result<Field> {
    if space.mesh().dimension() != 2 || space.components() != 1 {
        return Err(Error::invalid("random two-phase pattern needs a 2-D scalar space"));
    }
    if !(0.0 < beta_fraction && beta_fraction < 1.0) {
        return Err(Error::invalid("beta_fraction must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MODES: usize = 16;
    let waves: Vec<([f64; 2], f64)> = (0..MODES)
        .map(|_| {
            let angle: f64 = rng.gen_range(0.0..PI);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            ([angle.cos(), angle.sin()], phase)
        })
        .collect();
    let freq = 2.0 * PI * 8.0;
    let n = space.n_scalar_dofs();
    let mut g: Vec<(f64, usize)> = (0..n)
        .map(|s| {
            let p = space.dof_point(s);
            let v: f64 = waves
                .iter()
                .map(|(dir, phase)| (freq * (dir[0] * p[0] + dir[1] * p[1]) + phase).cos())
                .sum();
            (v, s)
        })
        .collect();
    // the highest `ones` field values become phase one; ties broken by index
    let ones = (beta_fraction * n as f64).round() as usize;
    g.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut coeffs = vec![0.0; n];
    for &(_, s) in g.iter().take(ones) {
        coeffs[s] = 1.0;
    }
    Field::new(space.clone(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_fem::{build_function_space, build_interval_mesh, build_unit_square_mesh};

    fn space_1d() -> Arc<FunctionSpace> {
        Arc::new(
            build_function_space(Arc::new(build_interval_mesh(10, 1.0).unwrap()), 1).unwrap(),
        )
    }

    fn space_2d(n: usize) -> Arc<FunctionSpace> {
        Arc::new(
            build_function_space(Arc::new(build_unit_square_mesh(n, n).unwrap()), 1).unwrap(),
        )
    }

    #[test]
    fn ramp_endpoints_and_mean() {
        let s = space_1d();
        let f = linear_ramp_ic(&s).unwrap();
        let first = f.coeffs()[0];
        let last = f.coeffs()[s.mesh().n_vertices() - 1];
        assert_eq!(first, 0.0);
        assert_eq!(last, 1.0);
        let mid = f.eval_in_cell(5, [0.0, 0.0]).unwrap();
        assert!((mid - 0.5).abs() < 1e-15);
        // mean one half puts the lever rule at equal phase fractions
        assert!((f.integral() - 0.5).abs() < 1e-13);
        assert!(linear_ramp_ic(&space_2d(2)).is_err());
    }

    #[test]
    fn random_pattern_deterministic_and_binary() {
        let s = space_2d(16);
        let a = random_two_phase_ic(&s, 7, 0.3).unwrap();
        let b = random_two_phase_ic(&s, 7, 0.3).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert!(a.coeffs().iter().all(|&v| v == 0.0 || v == 1.0));
        let c = random_two_phase_ic(&s, 8, 0.3).unwrap();
        assert_ne!(a.coeffs(), c.coeffs());
    }

    #[test]
    fn random_pattern_hits_requested_fraction() {
        let s = space_2d(32);
        let f = random_two_phase_ic(&s, 42, 0.3).unwrap();
        let area = f.integral();
        assert!((area - 0.3).abs() <= 0.02, "area fraction {area}");
    }

    #[test]
    fn random_pattern_vanishing_fraction() {
        let s = space_2d(8);
        let f = random_two_phase_ic(&s, 42, 1e-9).unwrap();
        assert!(f.coeffs().iter().all(|&v| v == 0.0));
        assert!(random_two_phase_ic(&s, 42, 0.0).is_err());
    }
}
