//! Closed-form molar free energies and their first two derivatives.
//!
//! The two-phase construction is a common-tangent line through the phase
//! reference points, quadratic branches outside the equilibrium interval,
//! and an optional smoothstep bump inside it whose height is the interface
//! energy. With zero bump the construction is the convex hull.

use crate::error::{Error, Result};

/// Value and first two derivatives of a molar free energy at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDerivs {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Parameters of the two-phase free energy (energies in J/mol, fractions
/// dimensionless, gradient coefficient in J mm^2/mol).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhaseParams {
    pub x_alpha: f64,
    pub x_beta: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    /// Curvature of the quadratic single-phase branches.
    pub curvature: f64,
    /// Height of the bump between the phases; zero gives the convex hull.
    pub interface_energy: f64,
    /// Gradient-energy coefficient.
    pub gradient_coeff: f64,
}

impl TwoPhaseParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.x_alpha && self.x_alpha < self.x_beta && self.x_beta < 1.0) {
            return Err(Error::invalid("two-phase energy needs 0 < x_alpha < x_beta < 1"));
        }
        if !(self.curvature > 0.0) {
            return Err(Error::invalid("two-phase energy needs curvature > 0"));
        }
        if self.interface_energy < 0.0 {
            return Err(Error::invalid("interface energy must be non-negative"));
        }
        if self.gradient_coeff < 0.0 {
            return Err(Error::invalid("gradient coefficient must be non-negative (kappa >= 0)"));
        }
        Ok(())
    }

    /// Slope of the common tangent.
    pub fn tangent_slope(&self) -> f64 {
        (self.f_beta - self.f_alpha) / (self.x_beta - self.x_alpha)
    }

    /// Uniform rescaling of all energy-valued parameters.
    pub fn scaled(&self, factor: f64) -> TwoPhaseParams {
        TwoPhaseParams {
            f_alpha: self.f_alpha * factor,
            f_beta: self.f_beta * factor,
            curvature: self.curvature * factor,
            interface_energy: self.interface_energy * factor,
            ..*self
        }
    }
}

impl Default for TwoPhaseParams {
    /// The canonical double-well instance used by the bundled scenarios.
    fn default() -> Self {
        TwoPhaseParams {
            x_alpha: 0.25,
            x_beta: 0.75,
            f_alpha: 0.01,
            f_beta: 0.02,
            curvature: 2.0,
            interface_energy: 1.0 / 120.0,
            gradient_coeff: 0.0,
        }
    }
}

/// Quadratic vacancy free energy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacancyEnergyParams {
    pub curvature: f64,
    pub x_eq: f64,
}

impl VacancyEnergyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.curvature > 0.0) {
            return Err(Error::invalid("vacancy energy needs curvature > 0"));
        }
        if !(0.0 < self.x_eq && self.x_eq < 0.1) {
            return Err(Error::invalid("equilibrium vacancy fraction must be small and positive"));
        }
        Ok(())
    }
}

/// Two-phase energy with its bump; `interface_energy = 0` gives the hull.
///
/// The evaluation is the piecewise closed form, extended naturally outside
/// [0, 1] by the quadratic branches so that transient overshoots keep a
/// restoring force. At the kink points the second derivative takes the
/// left-branch value.
pub fn two_phase_energy(p: &TwoPhaseParams, x: f64) -> EnergyDerivs {
    let m = p.tangent_slope();
    let mut value = p.f_alpha + m * (x - p.x_alpha);
    let mut first = m;
    let mut second = 0.0;
    if x < p.x_alpha {
        let d = x - p.x_alpha;
        value += 0.5 * p.curvature * d * d;
        first += p.curvature * d;
        second = p.curvature;
    } else if x > p.x_beta {
        let d = x - p.x_beta;
        value += 0.5 * p.curvature * d * d;
        first += p.curvature * d;
        second = p.curvature;
    } else if p.interface_energy > 0.0 && x > p.x_alpha && x < p.x_beta {
        let w = p.x_beta - p.x_alpha;
        let u = (x - p.x_alpha) / w;
        let s = u * u * (3.0 - 2.0 * u);
        let ds = 6.0 * u * (1.0 - u) / w;
        let dds = (6.0 - 12.0 * u) / (w * w);
        let a = 4.0 * p.interface_energy;
        value += a * s * (1.0 - s);
        first += a * (1.0 - 2.0 * s) * ds;
        second += a * ((1.0 - 2.0 * s) * dds - 2.0 * ds * ds);
    }
    EnergyDerivs { value, first, second }
}

/// Vacancy contribution `(k0/2)(x0 - x0_eq)^2`.
pub fn vacancy_energy(p: &VacancyEnergyParams, x0: f64) -> EnergyDerivs {
    let d = x0 - p.x_eq;
    EnergyDerivs {
        value: 0.5 * p.curvature * d * d,
        first: p.curvature * d,
        second: p.curvature,
    }
}

/// Single-phase quadratic energy `(k/2)(x - x_eq)^2`.
pub fn single_quadratic_energy(curvature: f64, x_eq: f64, x: f64) -> EnergyDerivs {
    let d = x - x_eq;
    EnergyDerivs {
        value: 0.5 * curvature * d * d,
        first: curvature * d,
        second: curvature,
    }
}

/// A molar free energy of one composition variable.
#[derive(Debug, Clone)]
pub enum FreeEnergyModel {
    /// Two-phase construction; `convexify` drops the bump (hull evaluation).
    TwoPhase { params: TwoPhaseParams, convexify: bool },
    SingleQuadratic { curvature: f64, x_eq: f64 },
    Vacancy(VacancyEnergyParams),
}

impl FreeEnergyModel {
    pub fn double_well(params: TwoPhaseParams) -> Result<Self> {
        params.validate()?;
        Ok(FreeEnergyModel::TwoPhase { params, convexify: false })
    }

    pub fn convex_hull(params: TwoPhaseParams) -> Result<Self> {
        params.validate()?;
        Ok(FreeEnergyModel::TwoPhase { params, convexify: true })
    }

    pub fn single_quadratic(curvature: f64, x_eq: f64) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(Error::invalid("quadratic energy needs curvature > 0"));
        }
        Ok(FreeEnergyModel::SingleQuadratic { curvature, x_eq })
    }

    pub fn vacancy(params: VacancyEnergyParams) -> Result<Self> {
        params.validate()?;
        Ok(FreeEnergyModel::Vacancy(params))
    }

    pub fn eval(&self, x: f64) -> EnergyDerivs {
        match self {
            FreeEnergyModel::TwoPhase { params, convexify } => {
                if *convexify {
                    let hull = TwoPhaseParams { interface_energy: 0.0, ..*params };
                    two_phase_energy(&hull, x)
                } else {
                    two_phase_energy(params, x)
                }
            }
            FreeEnergyModel::SingleQuadratic { curvature, x_eq } => {
                single_quadratic_energy(*curvature, *x_eq, x)
            }
            FreeEnergyModel::Vacancy(p) => vacancy_energy(p, x),
        }
    }

    /// Gradient-energy coefficient carried by the model (zero unless two-phase).
    pub fn gradient_coeff(&self) -> f64 {
        match self {
            FreeEnergyModel::TwoPhase { params, .. } => params.gradient_coeff,
            _ => 0.0,
        }
    }

    /// Curvature used for the dissipation scaling.
    pub fn dissipation_curvature(&self) -> f64 {
        match self {
            FreeEnergyModel::TwoPhase { params, .. } => params.curvature,
            FreeEnergyModel::SingleQuadratic { curvature, .. } => *curvature,
            FreeEnergyModel::Vacancy(p) => p.curvature,
        }
    }
}

/// Maximum relative mismatch of the analytic first and second derivatives
/// against central differences over the samples (step 1e-6).
///
/// The first derivative is differenced from energy values; the second from
/// first-derivative values, which keeps the check at rounding accuracy for
/// quadratics instead of the 1e-4-level noise of a second difference of
/// `f`. Relative to `max(1, |finite difference|)`, so small-magnitude
/// derivatives are compared absolutely.
pub fn verify_derivatives(model: &FreeEnergyModel, samples: &[f64]) -> f64 {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for &x in samples {
        let e = model.eval(x);
        let fp = model.eval(x + h);
        let fm = model.eval(x - h);
        let fd1 = (fp.value - fm.value) / (2.0 * h);
        let fd2 = (fp.first - fm.first) / (2.0 * h);
        worst = worst.max((e.first - fd1).abs() / fd1.abs().max(1.0));
        worst = worst.max((e.second - fd2).abs() / fd2.abs().max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> TwoPhaseParams {
        TwoPhaseParams::default()
    }

    /// Literal transcription of the closed-form hull expression, used as an
    /// independent oracle (sqrt of a square written as |.|).
    fn hull_oracle(x: f64) -> f64 {
        0.02 * x
            + (-x + (0.25 - x).abs() + 0.25).powi(2) / 4.0
            + (x + (x - 0.75).abs() - 0.75).powi(2) / 4.0
            + 0.005
    }

    /// Literal transcription of the double-well expression.
    fn double_well_oracle(x: f64) -> f64 {
        let r34 = (x - 0.75f64).powi(2).sqrt();
        let r14 = (x - 0.25f64).powi(2).sqrt();
        let poly = -16.0 * (x - 0.25).powi(3) + 12.0 * (x - 0.25).powi(2);
        let q = (0.25 - x) / (2.0 * r14) - (0.75 - x) / (2.0 * r34) - (2.0 * x - 1.5) / (2.0 * r34)
            + (2.0 * x - 0.5) / (2.0 * r14);
        let first = -(0.75 - x) / (2.0 * r34) - (2.0 * x - 1.5) / (2.0 * r34) - poly * q + 0.5;
        let second = (0.75 - x) / (2.0 * r34) + (2.0 * x - 1.5) / (2.0 * r34) + poly * q + 0.5;
        hull_oracle(x) + first * second / 30.0
    }

    #[test]
    fn hull_matches_reference_values() {
        let p = TwoPhaseParams { interface_energy: 0.0, ..canonical() };
        let at = |x: f64| two_phase_energy(&p, x);
        assert!((at(0.25).value - 0.01).abs() < 1e-15);
        let mid = at(0.5);
        assert!((mid.value - 0.015).abs() < 1e-15);
        assert!((mid.first - 0.02).abs() < 1e-15);
        assert_eq!(mid.second, 0.0);
        assert!((at(0.0).value - 0.0675).abs() < 1e-15);
    }

    #[test]
    fn double_well_matches_reference_value_at_midpoint() {
        let e = two_phase_energy(&canonical(), 0.5);
        assert!((e.value - (0.015 + 1.0 / 120.0)).abs() < 1e-15);
        // verify against the verbatim closed form as well
        assert!((e.value - double_well_oracle(0.5)).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_oracles_on_dense_grid() {
        let p = canonical();
        let hull = TwoPhaseParams { interface_energy: 0.0, ..p };
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0;
            if (x - 0.25).abs() < 1e-9 || (x - 0.75).abs() < 1e-9 {
                continue;
            }
            let h = two_phase_energy(&hull, x);
            assert!(
                (h.value - hull_oracle(x)).abs() < 1e-12,
                "hull mismatch at {x}: {} vs {}",
                h.value,
                hull_oracle(x)
            );
            let d = two_phase_energy(&p, x);
            assert!(
                (d.value - double_well_oracle(x)).abs() < 1e-12,
                "double-well mismatch at {x}"
            );
        }
    }

    #[test]
    fn zero_bump_reduces_to_hull() {
        let p = TwoPhaseParams { interface_energy: 0.0, ..canonical() };
        let dw = FreeEnergyModel::double_well(p).unwrap();
        let hull = FreeEnergyModel::convex_hull(p).unwrap();
        for &x in &[0.3, 0.5, 0.6, 0.74] {
            assert_eq!(dw.eval(x), hull.eval(x));
        }
    }

    #[test]
    fn bump_height_equals_interface_energy() {
        let p = canonical();
        let hull = TwoPhaseParams { interface_energy: 0.0, ..p };
        let mut max_diff: f64 = 0.0;
        let mut arg = 0.0;
        for i in 0..=4000 {
            let x = 0.25 + 0.5 * i as f64 / 4000.0;
            let d = two_phase_energy(&p, x).value - two_phase_energy(&hull, x).value;
            if d > max_diff {
                max_diff = d;
                arg = x;
            }
        }
        assert!((max_diff - p.interface_energy).abs() < 1e-10);
        // attained where the smoothstep is one half, i.e. the midpoint
        assert!((arg - 0.5).abs() < 1e-3);
    }

    #[test]
    fn common_tangent_slopes() {
        let p = canonical();
        let m = p.tangent_slope();
        let left = two_phase_energy(&p, p.x_alpha - 1e-12).first;
        let right = two_phase_energy(&p, p.x_beta + 1e-12).first;
        assert!((left - m).abs() < 1e-9);
        assert!((right - m).abs() < 1e-9);
        assert!((m - 0.02).abs() < 1e-15);
    }

    #[test]
    fn hull_is_convex() {
        let model = FreeEnergyModel::convex_hull(canonical()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=500 {
            let x = 0.001 + 0.998 * i as f64 / 500.0;
            let e = model.eval(x);
            assert!(e.second >= 0.0);
            assert!(e.first >= prev - 1e-14, "f' decreased at {x}");
            prev = e.first;
        }
    }

    #[test]
    fn vacancy_energy_examples() {
        let p = VacancyEnergyParams { curvature: 2.0, x_eq: 1e-3 };
        let at_eq = vacancy_energy(&p, 1e-3);
        assert_eq!(at_eq.value, 0.0);
        assert_eq!(at_eq.first, 0.0);
        assert_eq!(at_eq.second, 2.0);
        let shifted = vacancy_energy(&p, 2e-3);
        assert!((shifted.value - 1e-6).abs() < 1e-20);
        let d = 1e-4;
        assert!((vacancy_energy(&p, 1e-3 + d).first + vacancy_energy(&p, 1e-3 - d).first).abs() < 1e-18);
    }

    #[test]
    fn single_quadratic_examples() {
        let e = single_quadratic_energy(2.0, 0.5, 0.5);
        assert_eq!((e.value, e.first, e.second), (0.0, 0.0, 2.0));
        let e = single_quadratic_energy(2.0, 0.5, 0.6);
        assert!((e.value - 0.01).abs() < 1e-17);
        assert!((e.first - 0.2).abs() < 1e-15);
        assert_eq!(e.second, 2.0);
        for &x in &[-1.0, 0.2, 3.0] {
            assert_eq!(single_quadratic_energy(2.0, 0.5, x).second, 2.0);
        }
    }

    #[test]
    fn derivative_check_thresholds() {
        let quad = FreeEnergyModel::single_quadratic(2.0, 0.5).unwrap();
        let samples: Vec<f64> = (0..50).map(|i| 0.01 + 0.98 * i as f64 / 49.0).collect();
        assert!(verify_derivatives(&quad, &samples) <= 1e-9);

        let hull = FreeEnergyModel::convex_hull(canonical()).unwrap();
        assert!((hull.eval(0.5).first - 0.02).abs() < 1e-8);

        // interior samples away from the kink guard bands
        let dw = FreeEnergyModel::double_well(canonical()).unwrap();
        let interior: Vec<f64> = (0..100)
            .map(|i| 0.26 + 0.48 * i as f64 / 99.0)
            .collect();
        assert!(verify_derivatives(&dw, &interior) <= 1e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = canonical();
        p.gradient_coeff = -1.0;
        assert!(p.validate().is_err());
        p = canonical();
        p.curvature = 0.0;
        assert!(p.validate().is_err());
        p = canonical();
        p.x_alpha = 0.8;
        assert!(p.validate().is_err());
        p = canonical();
        p.interface_energy = -0.1;
        assert!(p.validate().is_err());
    }
}
