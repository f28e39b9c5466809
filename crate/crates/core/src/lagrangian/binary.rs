use std::sync::Arc;

use super::assemble::{
    accumulate_qp, assemble_system, build_pattern, field_globals, AssembledSystem,
    SparsityPattern, VarRow, MAX_ROW,
};
use super::dual::Dual2;
use super::layout::Discretization;
use crate::energy::FreeEnergyModel;
use crate::error::{Error, Result};
use crate::mesh_fem::{build_interval_mesh, build_unit_square_mesh, Mesh};

/// Interdiffusion coefficient, possibly phase-dependent. Field-dependent
/// coefficients are evaluated at the previous step's mole fraction, so the
/// variations never differentiate through them.
#[derive(Debug, Clone)]
pub enum Diffusivity {
    Constant(f64),
    /// Smoothstep blend between per-phase values across the equilibrium gap.
    TwoPhase { d_alpha: f64, d_beta: f64, x_alpha: f64, x_beta: f64 },
}

impl Diffusivity {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Diffusivity::Constant(d) => d,
            Diffusivity::TwoPhase { d_alpha, d_beta, x_alpha, x_beta } => {
                let u = ((x - x_alpha) / (x_beta - x_alpha)).clamp(0.0, 1.0);
                let s = u * u * (3.0 - 2.0 * u);
                d_alpha + (d_beta - d_alpha) * s
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Diffusivity::Constant(d) => d > 0.0,
            Diffusivity::TwoPhase { d_alpha, d_beta, .. } => d_alpha > 0.0 && d_beta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("diffusion coefficients must be positive"))
        }
    }
}

/// One backward step of the binary system: unknown fields `x`, `j`, `mu`
/// on quadratic spaces, previous mole fraction as data.
pub struct BinaryStepProblem {
    pub disc: Arc<Discretization>,
    pub energy: FreeEnergyModel,
    /// Curvature in the dissipation scaling `k/(2 D)`.
    pub dissipation_curvature: f64,
    pub diffusivity: Diffusivity,
    pub dt: f64,
    /// Previous-step mole fraction coefficients (scalar space).
    pub prev_x: Vec<f64>,
    pattern: SparsityPattern,
}

/// Field order of the binary monolithic system.
pub const BINARY_FIELDS: [(&str, bool); 3] = [("x", false), ("j", true), ("mu", false)];

fn binary_coupled(fi: usize, fj: usize) -> bool {
    // 0 = x, 1 = j, 2 = mu
    matches!(
        (fi, fj),
        (0, 0) | (0, 2) | (2, 0) | (1, 1) | (1, 2) | (2, 1)
    )
}

impl BinaryStepProblem {
    pub fn new(
        mesh: Arc<Mesh>,
        energy: FreeEnergyModel,
        dissipation_curvature: f64,
        diffusivity: Diffusivity,
        dt: f64,
        initial_x: Vec<f64>,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("time step must be positive"));
        }
        if !(dissipation_curvature > 0.0) {
            return Err(Error::invalid("dissipation curvature must be positive"));
        }
        diffusivity.validate()?;
        let disc = Arc::new(Discretization::new(mesh, &BINARY_FIELDS)?);
        if initial_x.len() != disc.scalar.n_scalar_dofs() {
            return Err(Error::invalid("initial mole fraction length mismatch"));
        }
        let pattern = build_pattern(&disc, binary_coupled);
        Ok(BinaryStepProblem {
            disc,
            energy,
            dissipation_curvature,
            diffusivity,
            dt,
            prev_x: initial_x,
            pattern,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.disc.n_dofs()
    }

    /// Residual and Jacobian as gradient and Hessian of the summed density.
    pub fn assemble(&self, u: &[f64]) -> Result<AssembledSystem> {
        let dim = self.disc.mesh.dimension();
        assemble_system(&self.disc, &self.pattern, u, |cell, globals, grad, hess| {
            if dim == 1 {
                self.cell_kernel::<5>(cell, u, globals, grad, hess)
            } else {
                self.cell_kernel::<7>(cell, u, globals, grad, hess)
            }
        })
    }

    /// Variable layout: 1-D `[x, dx, j, div j, mu]`,
    /// 2-D `[x, dx0, dx1, j0, j1, div j, mu]`.
    fn cell_kernel<const NV: usize>(
        &self,
        cell: usize,
        u: &[f64],
        globals_out: &mut Vec<usize>,
        grad: &mut Vec<f64>,
        hess: &mut Vec<f64>,
    ) -> Result<()> {
        let disc = &self.disc;
        let dim = disc.mesh.dimension();
        let nl = disc.scalar.n_local_scalar();
        let l_total = (2 + dim) * nl;
        let mut fg: Vec<Vec<usize>> = Vec::new();
        field_globals(disc, cell, &mut fg);
        globals_out.clear();
        for g in &fg {
            globals_out.extend_from_slice(g);
        }
        grad.clear();
        grad.resize(l_total, 0.0);
        hess.clear();
        hess.resize(l_total * l_total, 0.0);

        let sdofs = disc.scalar.cell_scalar_dofs(cell);
        let geom = disc.scalar.cell_geometry(cell);
        let basis = disc.scalar.evaluate_basis(cell, &disc.quad.points)?;

        let xs = disc.layout.slice("x", u);
        let js = disc.layout.slice("j", u);
        let mus = disc.layout.slice("mu", u);
        let n_scalar = disc.scalar.n_scalar_dofs();
        let inv_dt = 1.0 / self.dt;
        let kappa = self.energy.gradient_coeff();

        for (q, &wq) in disc.quad.weights.iter().enumerate() {
            let w = wq * geom.det;
            let nv = &basis.values[q];
            let gv = &basis.gradients[q];

            // values at the quadrature point
            let mut xv = 0.0;
            let mut xtv = 0.0;
            let mut dx = [0.0; 2];
            let mut dxt = [0.0; 2];
            let mut muv = 0.0;
            for (a, &s) in sdofs.iter().enumerate() {
                xv += xs[s] * nv[a];
                xtv += self.prev_x[s] * nv[a];
                muv += mus[s] * nv[a];
                for d in 0..dim {
                    dx[d] += xs[s] * gv[a][d];
                    dxt[d] += self.prev_x[s] * gv[a][d];
                }
            }
            let mut jv = [0.0; 2];
            let mut div = 0.0;
            for c in 0..dim {
                for (a, &s) in sdofs.iter().enumerate() {
                    jv[c] += js[c * n_scalar + s] * nv[a];
                    div += js[c * n_scalar + s] * gv[a][c];
                }
            }

            // seed the point-local variables
            let x = Dual2::<NV>::variable(xv, 0);
            let mut grad_x = [Dual2::<NV>::constant(0.0); 2];
            let mut j = [Dual2::<NV>::constant(0.0); 2];
            for d in 0..dim {
                grad_x[d] = Dual2::variable(dx[d], 1 + d);
                j[d] = Dual2::variable(jv[d], 1 + dim + d);
            }
            let div_j = Dual2::<NV>::variable(div, 1 + 2 * dim);
            let mu = Dual2::<NV>::variable(muv, 2 + 2 * dim);

            let d_eff = self.diffusivity.at(xtv);
            let k_over_d = self.dissipation_curvature / d_eff;
            let density = binary_density(
                &x,
                &grad_x[..dim],
                &j[..dim],
                &div_j,
                &mu,
                xtv,
                &dxt[..dim],
                &self.energy,
                kappa,
                k_over_d,
                inv_dt,
            );
            if !density.is_finite() {
                return Err(Error::Assembly {
                    cell,
                    detail: format!("non-finite density at x={xv}, j={jv:?}, mu={muv}"),
                });
            }

            // extraction rows matching the variable seeding above
            let mut rows = [VarRow::empty(); NV];
            let put = |tbl: &mut VarRow, start: usize, vals: &[f64]| {
                tbl.start = start;
                tbl.len = vals.len();
                tbl.w[..vals.len()].copy_from_slice(vals);
            };
            let nvals: Vec<f64> = nv.clone();
            let gx: Vec<f64> = gv.iter().map(|g| g[0]).collect();
            let gy: Vec<f64> = gv.iter().map(|g| g[1]).collect();
            put(&mut rows[0], 0, &nvals);
            for d in 0..dim {
                put(&mut rows[1 + d], 0, if d == 0 { &gx } else { &gy });
                put(&mut rows[1 + dim + d], (1 + d) * nl, &nvals);
            }
            // divergence reads all flux components
            let mut divw = [0.0; MAX_ROW];
            for c in 0..dim {
                for a in 0..nl {
                    divw[c * nl + a] = gv[a][c];
                }
            }
            rows[1 + 2 * dim] = VarRow { start: nl, len: dim * nl, w: divw };
            put(&mut rows[2 + 2 * dim], (1 + dim) * nl, &nvals);

            accumulate_qp(w, &density, &rows, l_total, grad, hess);
        }
        Ok(())
    }

    /// Weak-form residual coded directly from the three variational
    /// equations; the mole-fraction block omits the common `1/dt` factor,
    /// exactly as those forms are usually written.
    pub fn assemble_residual_handcoded(&self, u: &[f64]) -> Result<Vec<f64>> {
        let disc = &self.disc;
        disc.check_state_len(u)?;
        let dim = disc.mesh.dimension();
        let n_scalar = disc.scalar.n_scalar_dofs();
        let mut r = vec![0.0; disc.n_dofs()];
        let xs = disc.layout.slice("x", u);
        let js = disc.layout.slice("j", u);
        let mus = disc.layout.slice("mu", u);
        let x_off = disc.layout.field("x").offset;
        let j_off = disc.layout.field("j").offset;
        let mu_off = disc.layout.field("mu").offset;
        let kappa = self.energy.gradient_coeff();

        for cell in 0..disc.mesh.n_cells() {
            let sdofs = disc.scalar.cell_scalar_dofs(cell);
            let geom = disc.scalar.cell_geometry(cell);
            let basis = disc.scalar.evaluate_basis(cell, &disc.quad.points)?;
            for (q, &wq) in disc.quad.weights.iter().enumerate() {
                let w = wq * geom.det;
                let nv = &basis.values[q];
                let gv = &basis.gradients[q];
                let mut xv = 0.0;
                let mut xtv = 0.0;
                let mut muv = 0.0;
                let mut dx = [0.0; 2];
                for (a, &s) in sdofs.iter().enumerate() {
                    xv += xs[s] * nv[a];
                    xtv += self.prev_x[s] * nv[a];
                    muv += mus[s] * nv[a];
                    for d in 0..dim {
                        dx[d] += xs[s] * gv[a][d];
                    }
                }
                let mut jv = [0.0; 2];
                let mut div = 0.0;
                for c in 0..dim {
                    for (a, &s) in sdofs.iter().enumerate() {
                        jv[c] += js[c * n_scalar + s] * nv[a];
                        div += js[c * n_scalar + s] * gv[a][c];
                    }
                }
                let e = self.energy.eval(xv);
                let k_over_d = self.dissipation_curvature / self.diffusivity.at(xtv);
                let rate = (xv - xtv) / self.dt + div;
                for (a, &s) in sdofs.iter().enumerate() {
                    // d f0/dx * xhat + kappa grad x . grad xhat + mu xhat
                    let mut gdot = 0.0;
                    for d in 0..dim {
                        gdot += dx[d] * gv[a][d];
                    }
                    r[x_off + s] += w * (e.first * nv[a] + kappa * gdot + muv * nv[a]);
                    // (k/D) j . jhat + mu div jhat, per component
                    for c in 0..dim {
                        r[j_off + c * n_scalar + s] +=
                            w * (k_over_d * jv[c] * nv[a] + muv * gv[a][c]);
                    }
                    // ((x - x_t)/dt + div j) muhat
                    r[mu_off + s] += w * rate * nv[a];
                }
            }
        }
        for &d in &disc.constrained {
            r[d] = u[d];
        }
        Ok(r)
    }
}

/// The incremental Lagrangian density of the binary system at one point.
#[allow(clippy::too_many_arguments)]
fn binary_density<const NV: usize>(
    x: &Dual2<NV>,
    grad_x: &[Dual2<NV>],
    j: &[Dual2<NV>],
    div_j: &Dual2<NV>,
    mu: &Dual2<NV>,
    x_prev: f64,
    grad_x_prev: &[f64],
    energy: &FreeEnergyModel,
    kappa: f64,
    k_over_d: f64,
    inv_dt: f64,
) -> Dual2<NV> {
    let e = energy.eval(x.val);
    let mut f_m = x.chain(e.value, e.first, e.second);
    for g in grad_x {
        f_m = f_m + g.squared().scale(0.5 * kappa);
    }
    let e_prev = energy.eval(x_prev).value
        + 0.5 * kappa * grad_x_prev.iter().map(|g| g * g).sum::<f64>();
    let mut density = f_m.add_scalar(-e_prev).scale(inv_dt);
    for jc in j {
        density = density + jc.squared().scale(0.5 * k_over_d);
    }
    let rate = (*x).add_scalar(-x_prev).scale(inv_dt) + *div_j;
    density + *mu * rate
}

/// Evaluates the binary density at one quadrature point from raw local
/// data; used by tests and diagnostics.
pub struct QpBasis<'a> {
    pub values: &'a [f64],
    pub gradients: &'a [[f64; 2]],
    pub dim: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn binary_lagrangian_density(
    local_x: &[f64],
    local_j: &[f64],
    local_mu: &[f64],
    prev_local_x: &[f64],
    basis: &QpBasis,
    energy: &FreeEnergyModel,
    dissipation_curvature: f64,
    diffusivity: &Diffusivity,
    dt: f64,
) -> f64 {
    let dim = basis.dim;
    let nl = basis.values.len();
    let dot = |c: &[f64]| -> f64 { c.iter().zip(basis.values).map(|(a, b)| a * b).sum() };
    let xv = dot(local_x);
    let xtv = dot(prev_local_x);
    let muv = dot(local_mu);
    let mut dx = [0.0; 2];
    let mut dxt = [0.0; 2];
    let mut jv = [0.0; 2];
    let mut div = 0.0;
    for a in 0..nl {
        for d in 0..dim {
            dx[d] += local_x[a] * basis.gradients[a][d];
            dxt[d] += prev_local_x[a] * basis.gradients[a][d];
        }
    }
    for c in 0..dim {
        for a in 0..nl {
            jv[c] += local_j[c * nl + a] * basis.values[a];
            div += local_j[c * nl + a] * basis.gradients[a][c];
        }
    }
    let kappa = energy.gradient_coeff();
    let e = energy.eval(xv);
    let et = energy.eval(xtv);
    let f_m = e.value + 0.5 * kappa * (dx[0] * dx[0] + dx[1] * dx[1]);
    let f_prev = et.value + 0.5 * kappa * (dxt[0] * dxt[0] + dxt[1] * dxt[1]);
    let k_over_d = dissipation_curvature / diffusivity.at(xtv);
    (f_m - f_prev) / dt
        + 0.5 * k_over_d * (jv[0] * jv[0] + jv[1] * jv[1])
        + muv * ((xv - xtv) / dt + div)
}

pub fn binary_mesh_1d(n_cells: usize, length: f64) -> Result<Arc<Mesh>> {
    Ok(Arc::new(build_interval_mesh(n_cells, length)?))
}

pub fn binary_mesh_2d(nx: usize, ny: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(build_unit_square_mesh(nx, ny)?))
}

impl crate::solver::IncrementalProblem for BinaryStepProblem {
    fn n_dofs(&self) -> usize {
        self.disc.n_dofs()
    }

    fn initial_state(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.disc.n_dofs()];
        self.disc.layout.slice_mut("x", &mut u).copy_from_slice(&self.prev_x);
        u
    }

    fn assemble(&self, u: &[f64]) -> Result<AssembledSystem> {
        BinaryStepProblem::assemble(self, u)
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
    }

    fn advance(&mut self, state: &[f64]) {
        self.prev_x.copy_from_slice(self.disc.layout.slice("x", state));
    }
}
