use std::sync::Arc;

use super::assemble::{
    accumulate_qp, assemble_system, build_pattern, field_globals, AssembledSystem,
    SparsityPattern, VarRow, MAX_ROW,
};
use super::dual::Dual2;
use super::layout::Discretization;
use crate::energy::{two_phase_energy, vacancy_energy, TwoPhaseParams, VacancyEnergyParams};
use crate::error::{Error, Result};
use crate::mesh_fem::Mesh;

/// One backward step of the ternary system with vacancies: unknowns
/// `x0, x1, j0, j1, mu0, mu1, phi`. The third component is implied
/// (`j2 = -j0 - j1`), which couples the fluxes in the dissipation.
pub struct TernaryStepProblem {
    pub disc: Arc<Discretization>,
    /// Convex-hull free energy of the first alloy component (bump ignored).
    pub hull: TwoPhaseParams,
    /// Vacancy energy; its curvature also scales the vacancy-flux dissipation.
    pub vacancy: VacancyEnergyParams,
    /// `None` drops the vacancy-flux dissipation term (infinite mobility).
    pub d0: Option<f64>,
    pub d1: f64,
    pub d2: f64,
    /// Dissipation curvatures of the two alloy components.
    pub k1: f64,
    pub k2: f64,
    /// Kinetic coefficient of vacancy generation and annihilation.
    pub a_phi: f64,
    pub dt: f64,
    pub prev_x0: Vec<f64>,
    pub prev_x1: Vec<f64>,
    pattern: SparsityPattern,
}

/// Field order of the ternary monolithic system.
pub const TERNARY_FIELDS: [(&str, bool); 7] = [
    ("x0", false),
    ("x1", false),
    ("j0", true),
    ("j1", true),
    ("mu0", false),
    ("mu1", false),
    ("phi", false),
];

fn ternary_coupled(fi: usize, fj: usize) -> bool {
    // 0 x0, 1 x1, 2 j0, 3 j1, 4 mu0, 5 mu1, 6 phi
    let pairs: [(usize, usize); 13] = [
        (0, 0),
        (0, 4),
        (0, 6),
        (1, 1),
        (1, 5),
        (1, 6),
        (2, 2),
        (2, 3),
        (3, 3),
        (2, 4),
        (3, 5),
        (4, 6),
        (5, 6),
    ];
    pairs.contains(&(fi, fj)) || pairs.contains(&(fj, fi)) || fi == fj && fi == 6
}

impl TernaryStepProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: Arc<Mesh>,
        hull: TwoPhaseParams,
        vacancy: VacancyEnergyParams,
        d0: Option<f64>,
        d1: f64,
        d2: f64,
        k1: f64,
        k2: f64,
        a_phi: f64,
        dt: f64,
        initial_x0: Vec<f64>,
        initial_x1: Vec<f64>,
    ) -> Result<Self> {
        hull.validate()?;
        vacancy.validate()?;
        if !(dt > 0.0) {
            return Err(Error::invalid("time step must be positive"));
        }
        if !(d1 > 0.0 && d2 > 0.0) || d0.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::invalid("diffusion coefficients must be positive"));
        }
        if !(k1 > 0.0 && k2 > 0.0 && a_phi > 0.0) {
            return Err(Error::invalid("dissipation coefficients must be positive"));
        }
        let disc = Arc::new(Discretization::new(mesh, &TERNARY_FIELDS)?);
        let n = disc.scalar.n_scalar_dofs();
        if initial_x0.len() != n || initial_x1.len() != n {
            return Err(Error::invalid("initial fraction length mismatch"));
        }
        let pattern = build_pattern(&disc, ternary_coupled);
        Ok(TernaryStepProblem {
            disc,
            hull,
            vacancy,
            d0,
            d1,
            d2,
            k1,
            k2,
            a_phi,
            dt,
            prev_x0: initial_x0,
            prev_x1: initial_x1,
            pattern,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.disc.n_dofs()
    }

    pub fn assemble(&self, u: &[f64]) -> Result<AssembledSystem> {
        let dim = self.disc.mesh.dimension();
        assemble_system(&self.disc, &self.pattern, u, |cell, globals, grad, hess| {
            if dim == 1 {
                self.cell_kernel::<10>(cell, u, globals, grad, hess)
            } else {
                self.cell_kernel::<13>(cell, u, globals, grad, hess)
            }
        })
    }

    /// Variable layout: `[x0, x1, dx1 (dim), j0 (dim), j1 (dim), div j0,
    /// div j1, mu0, mu1, phi]`.
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
        let l_total = (5 + 2 * dim) * nl;
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
        let n_scalar = disc.scalar.n_scalar_dofs();
        let lay = &disc.layout;
        let (x0s, x1s) = (lay.slice("x0", u), lay.slice("x1", u));
        let (j0s, j1s) = (lay.slice("j0", u), lay.slice("j1", u));
        let (mu0s, mu1s) = (lay.slice("mu0", u), lay.slice("mu1", u));
        let phis = lay.slice("phi", u);
        let inv_dt = 1.0 / self.dt;
        let kappa = self.hull.gradient_coeff;
        let hull = TwoPhaseParams { interface_energy: 0.0, ..self.hull };

        // variable indices
        let (ix0, ix1) = (0, 1);
        let idx1 = 2; // dim entries
        let ij0 = 2 + dim;
        let ij1 = 2 + 2 * dim;
        let idiv0 = 2 + 3 * dim;
        let idiv1 = idiv0 + 1;
        let (imu0, imu1, iphi) = (idiv1 + 1, idiv1 + 2, idiv1 + 3);
        debug_assert_eq!(iphi + 1, NV);

        for (q, &wq) in disc.quad.weights.iter().enumerate() {
            let w = wq * geom.det;
            let nv = &basis.values[q];
            let gv = &basis.gradients[q];

            let at = |c: &[f64]| -> f64 {
                sdofs.iter().zip(nv).map(|(&s, &n)| c[s] * n).sum()
            };
            let x0v = at(x0s);
            let x1v = at(x1s);
            let x0t = at(&self.prev_x0);
            let x1t = at(&self.prev_x1);
            let mu0v = at(mu0s);
            let mu1v = at(mu1s);
            let phiv = at(phis);
            let mut dx1 = [0.0; 2];
            let mut dx1t = [0.0; 2];
            for (a, &s) in sdofs.iter().enumerate() {
                for d in 0..dim {
                    dx1[d] += x1s[s] * gv[a][d];
                    dx1t[d] += self.prev_x1[s] * gv[a][d];
                }
            }
            let mut j0v = [0.0; 2];
            let mut j1v = [0.0; 2];
            let mut div0 = 0.0;
            let mut div1 = 0.0;
            for c in 0..dim {
                for (a, &s) in sdofs.iter().enumerate() {
                    j0v[c] += j0s[c * n_scalar + s] * nv[a];
                    j1v[c] += j1s[c * n_scalar + s] * nv[a];
                    div0 += j0s[c * n_scalar + s] * gv[a][c];
                    div1 += j1s[c * n_scalar + s] * gv[a][c];
                }
            }

            let x0 = Dual2::<NV>::variable(x0v, ix0);
            let x1 = Dual2::<NV>::variable(x1v, ix1);
            let mut gx1 = [Dual2::<NV>::constant(0.0); 2];
            let mut j0 = [Dual2::<NV>::constant(0.0); 2];
            let mut j1 = [Dual2::<NV>::constant(0.0); 2];
            for d in 0..dim {
                gx1[d] = Dual2::variable(dx1[d], idx1 + d);
                j0[d] = Dual2::variable(j0v[d], ij0 + d);
                j1[d] = Dual2::variable(j1v[d], ij1 + d);
            }
            let dj0 = Dual2::<NV>::variable(div0, idiv0);
            let dj1 = Dual2::<NV>::variable(div1, idiv1);
            let mu0 = Dual2::<NV>::variable(mu0v, imu0);
            let mu1 = Dual2::<NV>::variable(mu1v, imu1);
            let phi = Dual2::<NV>::variable(phiv, iphi);

            // free-energy increment
            let eh = two_phase_energy(&hull, x1.val);
            let ev = vacancy_energy(&self.vacancy, x0.val);
            let mut f_m = x1.chain(eh.value, eh.first, eh.second)
                + x0.chain(ev.value, ev.first, ev.second);
            for d in 0..dim {
                f_m = f_m + gx1[d].squared().scale(0.5 * kappa);
            }
            let f_prev = two_phase_energy(&hull, x1t).value
                + vacancy_energy(&self.vacancy, x0t).value
                + 0.5 * kappa * dx1t.iter().map(|g| g * g).sum::<f64>();
            let mut density = f_m.add_scalar(-f_prev).scale(inv_dt);

            // dissipation: as printed, without the one-half prefactor
            if let Some(d0) = self.d0 {
                let k0_over_d0 = self.vacancy.curvature / d0;
                for d in 0..dim {
                    density = density + j0[d].squared().scale(k0_over_d0);
                }
            }
            for d in 0..dim {
                density = density + j1[d].squared().scale(self.k1 / self.d1);
                density = density + (j0[d] + j1[d]).squared().scale(self.k2 / self.d2);
            }
            density = density + phi.squared().scale(1.0 / self.a_phi);

            // constraints with vacancy generation
            let rate0 = x0.add_scalar(-x0t).scale(inv_dt) + dj0
                - phi * (-x0).add_scalar(1.0);
            let rate1 = x1.add_scalar(-x1t).scale(inv_dt) + dj1 + phi * x1;
            density = density + mu0 * rate0 + mu1 * rate1;

            if !density.is_finite() {
                return Err(Error::Assembly {
                    cell,
                    detail: format!(
                        "non-finite density at x0={x0v}, x1={x1v}, phi={phiv}"
                    ),
                });
            }

            let mut rows = [VarRow::empty(); NV];
            let put = |tbl: &mut VarRow, start: usize, vals: &[f64]| {
                tbl.start = start;
                tbl.len = vals.len();
                tbl.w[..vals.len()].copy_from_slice(vals);
            };
            let nvals: Vec<f64> = nv.clone();
            let gx: Vec<f64> = gv.iter().map(|g| g[0]).collect();
            let gy: Vec<f64> = gv.iter().map(|g| g[1]).collect();
            // local dof layout: x0 | x1 | j0 | j1 | mu0 | mu1 | phi
            put(&mut rows[ix0], 0, &nvals);
            put(&mut rows[ix1], nl, &nvals);
            for d in 0..dim {
                put(&mut rows[idx1 + d], nl, if d == 0 { &gx } else { &gy });
                put(&mut rows[ij0 + d], (2 + d) * nl, &nvals);
                put(&mut rows[ij1 + d], (2 + dim + d) * nl, &nvals);
            }
            let mut divw = [0.0; MAX_ROW];
            for c in 0..dim {
                for a in 0..nl {
                    divw[c * nl + a] = gv[a][c];
                }
            }
            rows[idiv0] = VarRow { start: 2 * nl, len: dim * nl, w: divw };
            rows[idiv1] = VarRow { start: (2 + dim) * nl, len: dim * nl, w: divw };
            put(&mut rows[imu0], (2 + 2 * dim) * nl, &nvals);
            put(&mut rows[imu1], (3 + 2 * dim) * nl, &nvals);
            put(&mut rows[iphi], (4 + 2 * dim) * nl, &nvals);

            accumulate_qp(w, &density, &rows, l_total, grad, hess);
        }
        Ok(())
    }
}

impl crate::solver::IncrementalProblem for TernaryStepProblem {
    fn n_dofs(&self) -> usize {
        self.disc.n_dofs()
    }

    fn initial_state(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.disc.n_dofs()];
        self.disc.layout.slice_mut("x0", &mut u).copy_from_slice(&self.prev_x0);
        self.disc.layout.slice_mut("x1", &mut u).copy_from_slice(&self.prev_x1);
        u
    }

    fn assemble(&self, u: &[f64]) -> Result<AssembledSystem> {
        TernaryStepProblem::assemble(self, u)
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
    }

    fn advance(&mut self, state: &[f64]) {
        self.prev_x0.copy_from_slice(self.disc.layout.slice("x0", state));
        self.prev_x1.copy_from_slice(self.disc.layout.slice("x1", state));
    }
}
