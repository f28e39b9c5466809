use crate::energy::{two_phase_energy, vacancy_energy, TwoPhaseParams};
use crate::error::{Error, Result};
use crate::lagrangian::{BinaryStepProblem, Discretization, TernaryStepProblem};
use crate::mesh_fem::Field;
use crate::thermo::entropy_production_density;

/// Per-step diagnostics of a trajectory.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// Integral of the (first) conserved fraction.
    pub mass_total: f64,
    /// Total free energy in solver units.
    pub free_energy: f64,
    /// Integral of the dissipation density.
    pub dissipation: f64,
    /// Smallest entropy-production density over the quadrature points.
    pub min_entropy_production: f64,
    /// 1-D runs only.
    pub interface_width: Option<f64>,
    pub newton_iterations: usize,
    pub min_x: f64,
    pub max_x: f64,
    pub ternary: Option<TernaryDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct TernaryDiagnostics {
    pub mass_x0: f64,
    pub mass_x1: f64,
    pub min_x0: f64,
    pub max_x0: f64,
}

/// Distance between the first crossing of `lo` and the last crossing of
/// `hi` along a 1-D profile (sampled at the Lagrange nodes in coordinate
/// order). Falling profiles are mirrored first.
pub fn interface_width(field: &Field, lo: f64, hi: f64) -> Result<f64> {
    let space = field.space();
    if space.mesh().dimension() != 1 || space.components() != 1 {
        return Err(Error::invalid("interface width needs a 1-D scalar field"));
    }
    let n = space.n_scalar_dofs();
    let mut nodes: Vec<(f64, f64)> = (0..n)
        .map(|s| (space.dof_point(s)[0], field.coeffs()[s]))
        .collect();
    nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let length = nodes.last().unwrap().0;
    if nodes.first().unwrap().1 > nodes.last().unwrap().1 {
        for (s, _) in nodes.iter_mut() {
            *s = length - *s;
        }
        nodes.reverse();
    }
    let crossing = |a: (f64, f64), b: (f64, f64), level: f64| -> Option<f64> {
        if (a.1 - level) * (b.1 - level) <= 0.0 && a.1 != b.1 {
            Some(a.0 + (level - a.1) / (b.1 - a.1) * (b.0 - a.0))
        } else {
            None
        }
    };
    let mut first_lo = None;
    let mut last_hi = None;
    for w in nodes.windows(2) {
        if first_lo.is_none() {
            first_lo = crossing(w[0], w[1], lo);
        }
        if let Some(s) = crossing(w[0], w[1], hi) {
            last_hi = Some(s);
        }
    }
    match (first_lo, last_hi) {
        (Some(a), Some(b)) => Ok(b - a),
        _ => Err(Error::UndefinedWidth(format!(
            "profile does not cross both thresholds {lo} and {hi}"
        ))),
    }
}

/// Default interface-width thresholds: the ten and ninety percent points
/// of the equilibrium range [0.25, 0.75].
pub const WIDTH_LO: f64 = 0.30;
pub const WIDTH_HI: f64 = 0.70;

fn minmax(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

struct QpFields {
    value: Vec<f64>,
    grad: Vec<[f64; 2]>,
}

/// Values and gradients of a scalar block at every quadrature point.
fn sample_scalar(disc: &Discretization, coeffs: &[f64]) -> QpFields {
    let quad = &disc.quad;
    let mesh = &disc.mesh;
    let dim = mesh.dimension();
    let mut value = Vec::with_capacity(mesh.n_cells() * quad.len());
    let mut grad = Vec::with_capacity(mesh.n_cells() * quad.len());
    for cell in 0..mesh.n_cells() {
        let sdofs = disc.scalar.cell_scalar_dofs(cell);
        let basis = disc.scalar.evaluate_basis(cell, &quad.points).expect("cell in range");
        for q in 0..quad.len() {
            let mut v = 0.0;
            let mut g = [0.0; 2];
            for (a, &s) in sdofs.iter().enumerate() {
                v += coeffs[s] * basis.values[q][a];
                for d in 0..dim {
                    g[d] += coeffs[s] * basis.gradients[q][a][d];
                }
            }
            value.push(v);
            grad.push(g);
        }
    }
    QpFields { value, grad }
}

fn qp_weights(disc: &Discretization) -> Vec<f64> {
    let mut w = Vec::with_capacity(disc.mesh.n_cells() * disc.quad.len());
    for cell in 0..disc.mesh.n_cells() {
        let det = disc.scalar.cell_geometry(cell).det;
        for &wq in &disc.quad.weights {
            w.push(wq * det);
        }
    }
    w
}

fn flux_at_qps(disc: &Discretization, name: &str, u: &[f64]) -> Vec<[f64; 2]> {
    let dim = disc.mesh.dimension();
    let n_scalar = disc.scalar.n_scalar_dofs();
    let block = disc.layout.slice(name, u);
    let mut out = Vec::with_capacity(disc.mesh.n_cells() * disc.quad.len());
    for cell in 0..disc.mesh.n_cells() {
        let sdofs = disc.scalar.cell_scalar_dofs(cell);
        let basis = disc.scalar.evaluate_basis(cell, &disc.quad.points).expect("cell in range");
        for q in 0..disc.quad.len() {
            let mut j = [0.0; 2];
            for c in 0..dim {
                for (a, &s) in sdofs.iter().enumerate() {
                    j[c] += block[c * n_scalar + s] * basis.values[q][a];
                }
            }
            out.push(j);
        }
    }
    out
}

/// Diagnostics of one accepted binary step.
pub fn binary_diagnostics(
    problem: &BinaryStepProblem,
    time: f64,
    state: &[f64],
    newton_iterations: usize,
) -> DiagnosticsRecord {
    let disc = &problem.disc;
    let xs = disc.layout.slice("x", state);
    let mus = disc.layout.slice("mu", state);
    let weights = qp_weights(disc);
    let x_qp = sample_scalar(disc, xs);
    let mu_qp = sample_scalar(disc, mus);
    let j_qp = flux_at_qps(disc, "j", state);
    let kappa = problem.energy.gradient_coeff();
    let k = problem.dissipation_curvature;

    let mut mass = 0.0;
    let mut free_energy = 0.0;
    let mut dissipation = 0.0;
    let mut min_xi = f64::INFINITY;
    for (i, &w) in weights.iter().enumerate() {
        let x = x_qp.value[i];
        let g = x_qp.grad[i];
        let e = problem.energy.eval(x);
        mass += w * x;
        free_energy += w * (e.value + 0.5 * kappa * (g[0] * g[0] + g[1] * g[1]));
        let d = problem.diffusivity.at(x);
        let j = j_qp[i];
        dissipation += w * (k / d) * (j[0] * j[0] + j[1] * j[1]);
        // scaled quadratic form of the entropy production
        let xi = entropy_production_density(&[mu_qp.grad[i]], &[d / k], 1.0)
            .expect("scalar coefficient is positive");
        min_xi = min_xi.min(xi);
    }
    let (min_x, max_x) = minmax(xs);
    let width = if disc.mesh.dimension() == 1 {
        Field::new(disc.scalar.clone(), xs.to_vec())
            .ok()
            .and_then(|f| interface_width(&f, WIDTH_LO, WIDTH_HI).ok())
    } else {
        None
    };
    DiagnosticsRecord {
        time,
        mass_total: mass,
        free_energy,
        dissipation,
        min_entropy_production: min_xi,
        interface_width: width,
        newton_iterations,
        min_x,
        max_x,
        ternary: None,
    }
}

/// Diagnostics of one accepted ternary step.
pub fn ternary_diagnostics(
    problem: &TernaryStepProblem,
    time: f64,
    state: &[f64],
    newton_iterations: usize,
) -> DiagnosticsRecord {
    let disc = &problem.disc;
    let x0s = disc.layout.slice("x0", state);
    let x1s = disc.layout.slice("x1", state);
    let phis = disc.layout.slice("phi", state);
    let weights = qp_weights(disc);
    let x0_qp = sample_scalar(disc, x0s);
    let x1_qp = sample_scalar(disc, x1s);
    let mu0_qp = sample_scalar(disc, disc.layout.slice("mu0", state));
    let mu1_qp = sample_scalar(disc, disc.layout.slice("mu1", state));
    let phi_qp = sample_scalar(disc, phis);
    let j0_qp = flux_at_qps(disc, "j0", state);
    let j1_qp = flux_at_qps(disc, "j1", state);

    let hull = TwoPhaseParams { interface_energy: 0.0, ..problem.hull };
    let kappa = problem.hull.gradient_coeff;
    let k0 = problem.vacancy.curvature;
    // scaled Onsager matrix: inverse of the flux-dissipation quadratic form
    let r00 = problem.d0.map_or(0.0, |d0| k0 / d0) + problem.k2 / problem.d2;
    let r01 = problem.k2 / problem.d2;
    let r11 = problem.k1 / problem.d1 + problem.k2 / problem.d2;
    let det = r00 * r11 - r01 * r01;
    let l_scaled = [
        0.5 * r11 / det,
        -0.5 * r01 / det,
        -0.5 * r01 / det,
        0.5 * r00 / det,
    ];

    let mut mass0 = 0.0;
    let mut mass1 = 0.0;
    let mut free_energy = 0.0;
    let mut dissipation = 0.0;
    let mut min_xi = f64::INFINITY;
    for (i, &w) in weights.iter().enumerate() {
        let g1 = x1_qp.grad[i];
        mass0 += w * x0_qp.value[i];
        mass1 += w * x1_qp.value[i];
        free_energy += w
            * (two_phase_energy(&hull, x1_qp.value[i]).value
                + vacancy_energy(&problem.vacancy, x0_qp.value[i]).value
                + 0.5 * kappa * (g1[0] * g1[0] + g1[1] * g1[1]));
        let (j0, j1) = (j0_qp[i], j1_qp[i]);
        let j2 = [-(j0[0] + j1[0]), -(j0[1] + j1[1])];
        let mut p = problem.k1 / problem.d1 * (j1[0] * j1[0] + j1[1] * j1[1])
            + problem.k2 / problem.d2 * (j2[0] * j2[0] + j2[1] * j2[1])
            + phi_qp.value[i] * phi_qp.value[i] / problem.a_phi;
        if let Some(d0) = problem.d0 {
            p += k0 / d0 * (j0[0] * j0[0] + j0[1] * j0[1]);
        }
        dissipation += w * p;
        let xi = entropy_production_density(&[mu0_qp.grad[i], mu1_qp.grad[i]], &l_scaled, 1.0)
            .expect("scaled Onsager matrix is positive definite");
        min_xi = min_xi.min(xi);
    }
    let (min_x0, max_x0) = minmax(x0s);
    let (min_x1, max_x1) = minmax(x1s);
    let width = if disc.mesh.dimension() == 1 {
        Field::new(disc.scalar.clone(), x1s.to_vec())
            .ok()
            .and_then(|f| interface_width(&f, WIDTH_LO, WIDTH_HI).ok())
    } else {
        None
    };
    DiagnosticsRecord {
        time,
        mass_total: mass1,
        free_energy,
        dissipation,
        min_entropy_production: min_xi,
        interface_width: width,
        newton_iterations,
        min_x: min_x1,
        max_x: max_x1,
        ternary: Some(TernaryDiagnostics { mass_x0: mass0, mass_x1: mass1, min_x0, max_x0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_fem::{build_function_space, build_interval_mesh, interpolate};
    use std::sync::Arc;

    fn field_1d(n: usize, f: impl Fn(f64) -> f64) -> Field {
        let mesh = Arc::new(build_interval_mesh(n, 1.0).unwrap());
        let space = Arc::new(build_function_space(mesh, 1).unwrap());
        interpolate(&space, |p| f(p[0])).unwrap()
    }

    #[test]
    fn width_of_linear_ramp() {
        let f = field_1d(50, |s| s);
        let w = interface_width(&f, 0.30, 0.70).unwrap();
        assert!((w - 0.40).abs() < 1e-12, "width {w}");
    }

    #[test]
    fn width_of_sharp_step() {
        let f = field_1d(200, |s| if s < 0.5 { 0.0 } else { 1.0 });
        let w = interface_width(&f, 0.30, 0.70).unwrap();
        assert!(w <= 0.010 + 1e-12, "width {w}");
    }

    #[test]
    fn width_of_tanh_profile() {
        let wref = 0.05;
        let f = field_1d(400, |s| 0.5 + 0.25 * ((s - 0.5) / wref).tanh());
        let w = interface_width(&f, 0.30, 0.70).unwrap();
        // closed form: crossings at tanh = +-0.8
        let expect = 2.0 * wref * 0.8f64.atanh();
        assert!((w - expect).abs() < 1e-4, "width {w} vs {expect}");
        assert!((expect - 0.1099).abs() < 1e-4);
    }

    #[test]
    fn falling_profile_is_mirrored() {
        let f = field_1d(50, |s| 1.0 - s);
        let w = interface_width(&f, 0.30, 0.70).unwrap();
        assert!((w - 0.40).abs() < 1e-12);
    }

    #[test]
    fn width_undefined_without_crossings() {
        let f = field_1d(20, |_| 0.5);
        assert!(matches!(
            interface_width(&f, 0.30, 0.70),
            Err(Error::UndefinedWidth(_))
        ));
    }
}
