//! Thermodynamic identities: chemical potentials from molar free energies,
//! affinities, entropy production, and the map between diffusion and
//! Onsager coefficients.
//!
//! These are used standalone as consistency checks; the solver works with
//! the scaled incremental forms directly.

use crate::error::{Error, Result};

/// Independent mole (or site) fractions `x_1..x_{n-1}`; the last component
/// is implied by closure.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    fractions: Vec<f64>,
}

impl Composition {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::invalid("composition needs at least one independent fraction"));
        }
        let sum: f64 = fractions.iter().sum();
        if fractions.iter().any(|&x| !(0.0..=1.0).contains(&x)) || sum > 1.0 + 1e-12 {
            return Err(Error::invalid("fractions must lie in [0,1] and sum to at most 1"));
        }
        Ok(Composition { fractions })
    }

    pub fn independent(&self) -> &[f64] {
        &self.fractions
    }

    pub fn n_components(&self) -> usize {
        self.fractions.len() + 1
    }

    /// The dependent fraction of the last component.
    pub fn last(&self) -> f64 {
        1.0 - self.fractions.iter().sum::<f64>()
    }

    fn is_interior(&self, margin: f64) -> bool {
        self.fractions.iter().all(|&x| x > margin && x < 1.0 - margin) && self.last() > margin
    }
}

/// Temperature, molar volume and transport coefficients of a system.
#[derive(Debug, Clone)]
pub struct TransportParams {
    /// Temperature (K).
    pub temperature: f64,
    /// Molar volume (mm^3/mol).
    pub molar_volume: f64,
    /// Symmetric positive-definite Onsager matrix, row-major, size
    /// `(n-1) x (n-1)`.
    pub onsager: Vec<f64>,
}

impl TransportParams {
    pub fn validate(&self, n_independent: usize) -> Result<()> {
        if !(self.temperature > 0.0) || !(self.molar_volume > 0.0) {
            return Err(Error::invalid("temperature and molar volume must be positive"));
        }
        if self.onsager.len() != n_independent * n_independent {
            return Err(Error::invalid("Onsager matrix size mismatch"));
        }
        check_spd(&self.onsager, n_independent)
    }
}

fn check_spd(m: &[f64], n: usize) -> Result<()> {
    // small-matrix Cholesky; the systems here have n <= 2
    let mut a = m.to_vec();
    for i in 0..n {
        for j in 0..i {
            if (m[i * n + j] - m[j * n + i]).abs() > 1e-12 * (1.0 + m[i * n + i].abs()) {
                return Err(Error::invalid("Onsager matrix must be symmetric"));
            }
        }
        for k in 0..i {
            let f = a[i * n + k];
            for j in i..n {
                a[j * n + i] -= f * a[j * n + k];
            }
        }
        let d = a[i * n + i];
        if d <= 0.0 {
            return Err(Error::invalid("Onsager matrix must be positive definite"));
        }
        let s = d.sqrt();
        for j in i..n {
            a[j * n + i] /= s;
        }
    }
    Ok(())
}

/// A molar free energy as a function of the independent fractions.
pub trait MolarFreeEnergy {
    /// Number of independent composition variables (`n - 1`).
    fn arity(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

/// Binary wrapper around a single-variable model.
pub struct BinaryEnergy<'a>(pub &'a crate::energy::FreeEnergyModel);

impl MolarFreeEnergy for BinaryEnergy<'_> {
    fn arity(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.eval(x[0]).value
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.0.eval(x[0]).first;
    }
}

/// Ternary vacancy energy: hull in the first alloy component plus the
/// quadratic vacancy term; variables are `[x0, x1]`.
pub struct TernaryVacancyEnergy {
    pub hull: crate::energy::TwoPhaseParams,
    pub vacancy: crate::energy::VacancyEnergyParams,
}

impl MolarFreeEnergy for TernaryVacancyEnergy {
    fn arity(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let hull = crate::energy::TwoPhaseParams { interface_energy: 0.0, ..self.hull };
        crate::energy::two_phase_energy(&hull, x[1]).value
            + crate::energy::vacancy_energy(&self.vacancy, x[0]).value
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let hull = crate::energy::TwoPhaseParams { interface_energy: 0.0, ..self.hull };
        out[0] = crate::energy::vacancy_energy(&self.vacancy, x[0]).first;
        out[1] = crate::energy::two_phase_energy(&hull, x[1]).first;
    }
}

/// Chemical potentials of all `n` components:
/// `mu_i = f + sum_k (delta_ik - x_k) df/dx_k`, with the last component
/// closing the sum.
pub fn chemical_potentials(model: &dyn MolarFreeEnergy, comp: &Composition) -> Result<Vec<f64>> {
    let m = model.arity();
    if comp.independent().len() != m {
        return Err(Error::invalid("composition arity does not match the model"));
    }
    let x = comp.independent();
    let f = model.value(x);
    let mut grad = vec![0.0; m];
    model.gradient(x, &mut grad);
    let dot: f64 = x.iter().zip(&grad).map(|(&xi, &g)| xi * g).sum();
    let mut mu: Vec<f64> = (0..m).map(|i| f + grad[i] - dot).collect();
    mu.push(f - dot);
    Ok(mu)
}

/// Chemical affinities `mu_i - mu_n = df/dx_i` for the independent components.
pub fn affinity(model: &dyn MolarFreeEnergy, comp: &Composition) -> Result<Vec<f64>> {
    let m = model.arity();
    if comp.independent().len() != m {
        return Err(Error::invalid("composition arity does not match the model"));
    }
    let mut grad = vec![0.0; m];
    model.gradient(comp.independent(), &mut grad);
    Ok(grad)
}

/// Entropy production density `(1/T^2) sum_ik L_ik grad(mu_i).grad(mu_k)`.
///
/// `affinity_gradients[i]` is the spatial gradient of the i-th affinity;
/// the quadratic form is non-negative whenever the matrix is SPD.
pub fn entropy_production_density(
    affinity_gradients: &[[f64; 2]],
    onsager: &[f64],
    temperature: f64,
) -> Result<f64> {
    let n = affinity_gradients.len();
    if onsager.len() != n * n {
        return Err(Error::invalid("Onsager matrix size mismatch"));
    }
    check_spd(onsager, n)?;
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature must be positive"));
    }
    let mut xi = 0.0;
    for i in 0..n {
        for k in 0..n {
            let dot = affinity_gradients[i][0] * affinity_gradients[k][0]
                + affinity_gradients[i][1] * affinity_gradients[k][1];
            xi += onsager[i * n + k] * dot;
        }
    }
    Ok(xi / (temperature * temperature))
}

/// Entropy production from explicit fluxes, `-(1/T) sum_k j_k . grad(mu_k)`.
///
/// Equals the quadratic-form route when the fluxes obey the linear flux law;
/// kept separate so the two routes can be cross-checked.
pub fn entropy_production_from_fluxes(
    fluxes: &[[f64; 2]],
    affinity_gradients: &[[f64; 2]],
    temperature: f64,
) -> f64 {
    let mut xi = 0.0;
    for (j, g) in fluxes.iter().zip(affinity_gradients) {
        xi -= j[0] * g[0] + j[1] * g[1];
    }
    xi / temperature
}

/// Onsager coefficient reproducing Fick diffusion in a quadratic branch:
/// `L = D T / (k Omega)`.
pub fn onsager_from_diffusion(d: f64, temperature: f64, curvature: f64, molar_volume: f64) -> Result<f64> {
    if !(d > 0.0 && temperature > 0.0 && curvature > 0.0 && molar_volume > 0.0) {
        return Err(Error::invalid("onsager_from_diffusion needs positive inputs"));
    }
    Ok(d * temperature / (curvature * molar_volume))
}

/// Residual of the Gibbs-Duhem identity `sum_j x_j d(mu_j) = 0` along a
/// composition direction, via central finite differences of the potentials
/// (step 1e-6), independent of the analytic derivative path.
pub fn gibbs_duhem_residual(
    model: &dyn MolarFreeEnergy,
    comp: &Composition,
    direction: &[f64],
) -> Result<f64> {
    let m = model.arity();
    if direction.len() != m {
        return Err(Error::invalid("direction arity mismatch"));
    }
    let h = 1e-6;
    if !comp.is_interior(2.0 * h) {
        return Err(Error::invalid("composition must be interior to the simplex"));
    }
    let x = comp.independent();
    let shift = |sign: f64| -> Result<Vec<f64>> {
        let moved: Vec<f64> = x.iter().zip(direction).map(|(&xi, &d)| xi + sign * h * d).collect();
        chemical_potentials(model, &Composition::new(moved)?)
    };
    let plus = shift(1.0)?;
    let minus = shift(-1.0)?;
    let mut residual = 0.0;
    for j in 0..m {
        residual += x[j] * (plus[j] - minus[j]) / (2.0 * h);
    }
    residual += comp.last() * (plus[m] - minus[m]) / (2.0 * h);
    Ok(residual)
}

/// Affinity when the molar volume varies with composition:
/// `(f' V - f V') / (V - x V')`.
pub fn affinity_variable_volume(f: f64, df: f64, volume: f64, dvolume: f64, x: f64) -> Result<f64> {
    let denom = volume - x * dvolume;
    if denom.abs() < 1e-14 * volume.abs() {
        return Err(Error::SingularConfiguration(
            "molar volume term V - x V' vanishes".into(),
        ));
    }
    Ok((df * volume - f * dvolume) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{FreeEnergyModel, TwoPhaseParams, VacancyEnergyParams};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn hull_model() -> FreeEnergyModel {
        FreeEnergyModel::convex_hull(TwoPhaseParams::default()).unwrap()
    }

    #[test]
    fn binary_potentials_at_midpoint() {
        let model = hull_model();
        let comp = Composition::new(vec![0.5]).unwrap();
        let mu = chemical_potentials(&BinaryEnergy(&model), &comp).unwrap();
        assert!((mu[0] - 0.025).abs() < 1e-15);
        assert!((mu[1] - 0.005).abs() < 1e-15);
        let a = affinity(&BinaryEnergy(&model), &comp).unwrap();
        assert!((a[0] - 0.02).abs() < 1e-15);
        assert!((a[0] - (mu[0] - mu[1])).abs() < 1e-15);
    }

    #[test]
    fn zero_affinity_means_equal_potentials() {
        let model = FreeEnergyModel::single_quadratic(2.0, 0.5).unwrap();
        let comp = Composition::new(vec![0.5]).unwrap();
        let mu = chemical_potentials(&BinaryEnergy(&model), &comp).unwrap();
        assert!((mu[0] - mu[1]).abs() < 1e-15);
        assert!((mu[0] - model.eval(0.5).value).abs() < 1e-15);
    }

    #[test]
    fn ternary_component_without_dependence_shares_potential() {
        // f independent of the second variable -> mu_2 = mu_3
        struct OnlyFirst;
        impl MolarFreeEnergy for OnlyFirst {
            fn arity(&self) -> usize {
                2
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0] * x[0] + 0.3 * x[0]
            }
            fn gradient(&self, x: &[f64], out: &mut [f64]) {
                out[0] = 2.0 * x[0] + 0.3;
                out[1] = 0.0;
            }
        }
        let comp = Composition::new(vec![0.2, 0.3]).unwrap();
        let mu = chemical_potentials(&OnlyFirst, &comp).unwrap();
        assert!((mu[1] - mu[2]).abs() < 1e-15);
    }

    #[test]
    fn affinity_identity_over_random_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let binary = hull_model();
        let ternary = TernaryVacancyEnergy {
            hull: TwoPhaseParams::default(),
            vacancy: VacancyEnergyParams { curvature: 2.0, x_eq: 1e-3 },
        };
        for _ in 0..1000 {
            let x = rng.gen_range(0.01..0.99);
            let comp = Composition::new(vec![x]).unwrap();
            let mu = chemical_potentials(&BinaryEnergy(&binary), &comp).unwrap();
            let grad = affinity(&BinaryEnergy(&binary), &comp).unwrap();
            assert!((mu[0] - mu[1] - grad[0]).abs() < 1e-12);

            let x0 = rng.gen_range(0.001..0.05);
            let x1 = rng.gen_range(0.01..0.9);
            let comp3 = Composition::new(vec![x0, x1]).unwrap();
            let mu3 = chemical_potentials(&ternary, &comp3).unwrap();
            let grad3 = affinity(&ternary, &comp3).unwrap();
            assert!((mu3[0] - mu3[2] - grad3[0]).abs() < 1e-12);
            assert!((mu3[1] - mu3[2] - grad3[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_production_examples() {
        assert_eq!(
            entropy_production_density(&[[0.0, 0.0]], &[1.0], 1.0).unwrap(),
            0.0
        );
        let xi = entropy_production_density(&[[2.0, 0.0]], &[1.0], 1.0).unwrap();
        assert!((xi - 4.0).abs() < 1e-15);
        assert!(entropy_production_density(&[[1.0, 0.0]], &[-1.0], 1.0).is_err());
    }

    #[test]
    fn entropy_production_nonnegative_for_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            // SPD by construction: A^T A + eps I
            let a: [f64; 4] = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let eps = 1e-6;
            let l = [
                a[0] * a[0] + a[2] * a[2] + eps,
                a[0] * a[1] + a[2] * a[3],
                a[0] * a[1] + a[2] * a[3],
                a[1] * a[1] + a[3] * a[3] + eps,
            ];
            let g = [
                [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
            ];
            let t = rng.gen_range(0.5..1500.0);
            let xi = entropy_production_density(&g, &l, t).unwrap();
            assert!(xi >= 0.0, "xi = {xi}");
        }
    }

    #[test]
    fn entropy_production_label_permutation_invariant() {
        let l = [2.0, 0.5, 0.5, 1.0];
        let lp = [1.0, 0.5, 0.5, 2.0]; // swap labels 1 <-> 2
        let g = [[1.0, -2.0], [0.5, 3.0]];
        let gp = [g[1], g[0]];
        let a = entropy_production_density(&g, &l, 700.0).unwrap();
        let b = entropy_production_density(&gp, &lp, 700.0).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn flux_route_matches_quadratic_form_under_flux_law() {
        // binary: j = -(L/T) grad(mu), so -(1/T) j.grad(mu) = (L/T^2)|grad|^2
        let l = 0.37;
        let t = 850.0;
        let g = [[1.3, -0.4]];
        let j = [[-l / t * g[0][0], -l / t * g[0][1]]];
        let a = entropy_production_from_fluxes(&j, &g, t);
        let b = entropy_production_density(&g, &[l], t).unwrap();
        assert!((a - b).abs() < 1e-15 * (1.0 + b.abs()));
    }

    #[test]
    fn onsager_map_examples() {
        assert_eq!(onsager_from_diffusion(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        let l = onsager_from_diffusion(1.0, 800.0, 2.0, 7000.0).unwrap();
        assert!((l - 800.0 / 14000.0).abs() < 1e-15);
        let half = onsager_from_diffusion(1.0, 800.0, 4.0, 7000.0).unwrap();
        assert!((half - l / 2.0).abs() < 1e-15);
        assert!(onsager_from_diffusion(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn onsager_map_reproduces_fick_flux() {
        // with f = (k/2)(x - xeq)^2 the scaled flux law -(D/k) grad(f')
        // equals -D grad(x) identically; check on sampled gradients
        let (d, k) = (1.7, 3.2);
        for &(x, gx) in &[(0.3, 0.2), (0.6, -1.0), (0.9, 0.7)] {
            let fpp = crate::energy::single_quadratic_energy(k, 0.5, x).second;
            let flux_thermo = -(d / k) * fpp * gx; // grad(f') = f'' grad(x)
            let flux_fick = -d * gx;
            assert!((flux_thermo - flux_fick).abs() < 1e-15);
        }
    }

    #[test]
    fn gibbs_duhem_binary_and_quadratic() {
        let dw = FreeEnergyModel::double_well(TwoPhaseParams::default()).unwrap();
        let comp = Composition::new(vec![0.4]).unwrap();
        let r = gibbs_duhem_residual(&BinaryEnergy(&dw), &comp, &[1.0]).unwrap();
        assert!(r.abs() < 1e-9, "residual {r}");

        let quad = FreeEnergyModel::single_quadratic(2.0, 0.5).unwrap();
        let comp = Composition::new(vec![0.5]).unwrap();
        let r = gibbs_duhem_residual(&BinaryEnergy(&quad), &comp, &[1.0]).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn gibbs_duhem_random_ternary_polynomials() {
        // random cubic polynomial free energies over 100 interior trials
        struct Poly {
            c: [f64; 9],
        }
        impl MolarFreeEnergy for Poly {
            fn arity(&self) -> usize {
                2
            }
            fn value(&self, x: &[f64]) -> f64 {
                let (a, b) = (x[0], x[1]);
                self.c[0]
                    + self.c[1] * a
                    + self.c[2] * b
                    + self.c[3] * a * a
                    + self.c[4] * a * b
                    + self.c[5] * b * b
                    + self.c[6] * a * a * a
                    + self.c[7] * a * a * b
                    + self.c[8] * b * b * b
            }
            fn gradient(&self, x: &[f64], out: &mut [f64]) {
                let (a, b) = (x[0], x[1]);
                out[0] = self.c[1]
                    + 2.0 * self.c[3] * a
                    + self.c[4] * b
                    + 3.0 * self.c[6] * a * a
                    + 2.0 * self.c[7] * a * b;
                out[1] = self.c[2]
                    + self.c[4] * a
                    + 2.0 * self.c[5] * b
                    + self.c[7] * a * a
                    + 3.0 * self.c[8] * b * b;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let poly = Poly { c: core::array::from_fn(|_| rng.gen_range(-1.0..1.0)) };
            let x0 = rng.gen_range(0.05..0.45);
            let x1 = rng.gen_range(0.05..0.45);
            let comp = Composition::new(vec![x0, x1]).unwrap();
            let dir = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let r = gibbs_duhem_residual(&poly, &comp, &dir).unwrap();
            assert!(r.abs() < 1e-8, "residual {r}");
        }
    }

    #[test]
    fn gibbs_duhem_rejects_boundary() {
        let quad = FreeEnergyModel::single_quadratic(1.0, 0.5).unwrap();
        let comp = Composition::new(vec![0.0]).unwrap();
        assert!(gibbs_duhem_residual(&BinaryEnergy(&quad), &comp, &[1.0]).is_err());
    }

    #[test]
    fn variable_volume_affinity() {
        assert_eq!(affinity_variable_volume(1.0, 0.7, 2.0, 0.0, 0.3).unwrap(), 0.7);
        let v = affinity_variable_volume(1.0, 0.0, 1.0, 0.1, 0.0).unwrap();
        assert!((v + 0.1).abs() < 1e-15);
        assert_eq!(affinity_variable_volume(2.0, 3.0, 2.0, 0.0, 0.5).unwrap(), 3.0);
        assert!(affinity_variable_volume(1.0, 1.0, 1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn transport_params_validation() {
        let ok = TransportParams { temperature: 800.0, molar_volume: 7000.0, onsager: vec![1.0] };
        ok.validate(1).unwrap();
        let bad = TransportParams { temperature: 800.0, molar_volume: 7000.0, onsager: vec![-1.0] };
        assert!(bad.validate(1).is_err());
        let asym = TransportParams {
            temperature: 1.0,
            molar_volume: 1.0,
            onsager: vec![1.0, 0.5, -0.5, 1.0],
        };
        assert!(asym.validate(2).is_err());
    }
}
