use std::path::PathBuf;

use crate::error::{Error, Result};

/// Which model a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Double-well free energy with gradient regularization.
    CahnHilliard,
    /// Convex hull with gradient regularization.
    CaseI,
    /// Convex hull without regularization (sharp interface).
    CaseII,
    /// Single quadratic well; the linear-diffusion reference.
    SingleQuadratic,
    /// Ternary system with vacancies as the non-conserved component.
    TernaryVacancy,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cahn-hilliard" => Some(Self::CahnHilliard),
            "case-i" => Some(Self::CaseI),
            "case-ii" => Some(Self::CaseII),
            "single-quadratic" => Some(Self::SingleQuadratic),
            "ternary-vacancy" => Some(Self::TernaryVacancy),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CahnHilliard => "cahn-hilliard",
            Self::CaseI => "case-i",
            Self::CaseII => "case-ii",
            Self::SingleQuadratic => "single-quadratic",
            Self::TernaryVacancy => "ternary-vacancy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSpec {
    Interval { cells: usize, length: f64 },
    Square { nx: usize, ny: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcKind {
    LinearRamp,
    RandomTwoPhase { beta_fraction: f64 },
    Uniform { value: f64 },
    Cosine { amplitude: f64 },
}

impl IcKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LinearRamp => "linear-ramp",
            Self::RandomTwoPhase { .. } => "random-two-phase",
            Self::Uniform { .. } => "uniform",
            Self::Cosine { .. } => "cosine",
        }
    }
}

/// Free-energy parameters as configured (figure units).
///
/// `energy_scale` converts the energy-valued parameters into the internal
/// unit system before solving: energies and curvatures are multiplied by
/// it and the vacancy kinetic coefficient divided, which leaves the
/// kinetics invariant while setting the physical ratio between the
/// gradient coefficient and the well depth. The default reproduces the
/// bundled scenarios' interface widths at millimeter scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConfig {
    pub x_alpha: f64,
    pub x_beta: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub curvature: f64,
    pub interface_energy: f64,
    pub kappa: f64,
    pub energy_scale: f64,
    /// Well centre of the single-quadratic model.
    pub x_eq: f64,
    /// Vacancy energy curvature (ternary).
    pub vacancy_curvature: f64,
    /// Equilibrium vacancy site fraction (ternary).
    pub x0_eq: f64,
    /// Dissipation curvatures of the two alloy components (ternary).
    pub k1: f64,
    pub k2: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            x_alpha: 0.25,
            x_beta: 0.75,
            f_alpha: 0.01,
            f_beta: 0.02,
            curvature: 2.0,
            interface_energy: 1.0 / 120.0,
            kappa: 0.0,
            energy_scale: 1e5,
            x_eq: 0.5,
            vacancy_curvature: 2.0,
            x0_eq: 1e-3,
            k1: 2.0,
            k2: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportConfig {
    /// Interdiffusion coefficient of the binary models (mm^2/s).
    pub d_tilde: f64,
    /// Vacancy diffusion coefficient; `None` means infinitely fast.
    pub d0: Option<f64>,
    pub d1: f64,
    pub d2: f64,
    /// Vacancy generation/annihilation coefficient.
    pub a_phi: f64,
    /// Temperature (K); enters reporting and the Onsager map only.
    pub temperature: f64,
    /// Molar volume (mm^3/mol); reporting and the Onsager map only.
    pub molar_volume: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            d_tilde: 1.0,
            d0: None,
            d1: 2.0,
            d2: 1.0,
            a_phi: 1e3,
            temperature: 800.0,
            molar_volume: 7000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dt: 1e-3, t_end: 0.2, snapshot_stride: 10 }
    }
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub model: ModelKind,
    pub mesh: MeshSpec,
    pub energy: EnergyConfig,
    pub transport: TransportConfig,
    pub time: TimeConfig,
    pub ic: IcKind,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            preset: None,
            model: ModelKind::CahnHilliard,
            mesh: MeshSpec::Interval { cells: 200, length: 1.0 },
            energy: EnergyConfig { kappa: 5.0, ..EnergyConfig::default() },
            transport: TransportConfig::default(),
            time: TimeConfig::default(),
            ic: IcKind::LinearRamp,
            seed: 42,
            output_dir: PathBuf::from("./out"),
        }
    }
}

impl ScenarioConfig {
    /// Cross-field validation, mirroring the per-module invariants.
    pub fn validate(&self) -> Result<()> {
        let e = &self.energy;
        if !(0.0 < e.x_alpha && e.x_alpha < e.x_beta && e.x_beta < 1.0) {
            return Err(Error::invalid("need 0 < x_alpha < x_beta < 1"));
        }
        if e.kappa < 0.0 {
            return Err(Error::invalid("kappa must satisfy kappa >= 0"));
        }
        if !(e.curvature > 0.0) || !(e.vacancy_curvature > 0.0) {
            return Err(Error::invalid("energy curvatures must be positive"));
        }
        if e.interface_energy < 0.0 {
            return Err(Error::invalid("interface_energy must be non-negative"));
        }
        if !(e.energy_scale > 0.0) {
            return Err(Error::invalid("energy_scale must be positive"));
        }
        if !(0.0 < e.x0_eq && e.x0_eq < 0.1) {
            return Err(Error::invalid("x0_eq must be small and positive"));
        }
        if self.model == ModelKind::CaseII && e.kappa != 0.0 {
            return Err(Error::invalid("case-ii requires kappa = 0"));
        }
        let t = &self.transport;
        if !(t.d_tilde > 0.0 && t.d1 > 0.0 && t.d2 > 0.0 && t.a_phi > 0.0)
            || t.d0.is_some_and(|d| !(d > 0.0))
        {
            return Err(Error::invalid("transport coefficients must be positive"));
        }
        if !(t.temperature > 0.0 && t.molar_volume > 0.0) {
            return Err(Error::invalid("temperature and molar volume must be positive"));
        }
        if !(self.time.dt > 0.0 && self.time.dt <= self.time.t_end) {
            return Err(Error::invalid("need 0 < dt <= t_end"));
        }
        match self.mesh {
            MeshSpec::Interval { cells, length } => {
                if cells == 0 || !(length > 0.0) {
                    return Err(Error::invalid("interval mesh needs cells >= 1, length > 0"));
                }
            }
            MeshSpec::Square { nx, ny } => {
                if nx == 0 || ny == 0 {
                    return Err(Error::invalid("square mesh needs nx, ny >= 1"));
                }
            }
        }
        if let IcKind::RandomTwoPhase { beta_fraction } = self.ic {
            if !(0.0 < beta_fraction && beta_fraction < 1.0) {
                return Err(Error::invalid("beta_fraction must lie in (0, 1)"));
            }
            if matches!(self.mesh, MeshSpec::Interval { .. }) {
                return Err(Error::invalid("random-two-phase initial condition needs a 2-D mesh"));
            }
        }
        if self.ic == IcKind::LinearRamp && matches!(self.mesh, MeshSpec::Square { .. }) {
            return Err(Error::invalid("linear-ramp initial condition needs a 1-D mesh"));
        }
        Ok(())
    }
}

/// Parses the line-oriented `key = value` grammar with `[section]` headers
/// and `#` comments. A `preset = <name>` line (before any section) seeds
/// the configuration; later keys override it. Reports the first error with
/// its line number.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut section = String::new();
    let mut seen_section = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |message: String| Error::Config { line: line_no, message };
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| fail("unterminated section header".into()))?;
            if !["mesh", "energy", "transport", "time", "ic", "output"].contains(&name) {
                return Err(fail(format!("unknown section [{name}]")));
            }
            section = name.to_string();
            seen_section = true;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| fail("expected key = value".into()))?;
        if value.is_empty() {
            return Err(fail(format!("missing value for {key}")));
        }
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| fail(format!("invalid number {v:?}")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| fail(format!("invalid integer {v:?}")))
        };

        if !seen_section {
            match key {
                "preset" => {
                    cfg = super::preset::preset(value)
                        .map_err(|e| fail(format!("unknown preset {value:?}: {e}")))?;
                }
                _ => return Err(fail(format!("unknown top-level key {key}"))),
            }
            continue;
        }
        match (section.as_str(), key) {
            ("mesh", "cells") => {
                if let Some((a, b)) = value.split_once(',') {
                    cfg.mesh = MeshSpec::Square { nx: int(a.trim())?, ny: int(b.trim())? };
                } else {
                    let cells = int(value)?;
                    let length = match cfg.mesh {
                        MeshSpec::Interval { length, .. } => length,
                        _ => 1.0,
                    };
                    cfg.mesh = MeshSpec::Interval { cells, length };
                }
            }
            ("mesh", "length") => {
                let length = num(value)?;
                match cfg.mesh {
                    MeshSpec::Interval { cells, .. } => {
                        cfg.mesh = MeshSpec::Interval { cells, length }
                    }
                    _ => return Err(fail("length applies to 1-D meshes only".into())),
                }
            }
            ("energy", "model") => {
                cfg.model = ModelKind::parse(value)
                    .ok_or_else(|| fail(format!("unknown model {value:?}")))?;
            }
            ("energy", "x_alpha") => cfg.energy.x_alpha = num(value)?,
            ("energy", "x_beta") => cfg.energy.x_beta = num(value)?,
            ("energy", "f_alpha") => cfg.energy.f_alpha = num(value)?,
            ("energy", "f_beta") => cfg.energy.f_beta = num(value)?,
            ("energy", "curvature" | "k") => cfg.energy.curvature = num(value)?,
            ("energy", "interface_energy" | "delta_f_int") => {
                cfg.energy.interface_energy = num(value)?
            }
            ("energy", "kappa") => {
                let v = num(value)?;
                if v < 0.0 {
                    return Err(fail("kappa must satisfy kappa >= 0".into()));
                }
                cfg.energy.kappa = v;
            }
            ("energy", "energy_scale") => cfg.energy.energy_scale = num(value)?,
            ("energy", "x_eq") => cfg.energy.x_eq = num(value)?,
            ("energy", "vacancy_curvature" | "k0") => cfg.energy.vacancy_curvature = num(value)?,
            ("energy", "x0_eq") => cfg.energy.x0_eq = num(value)?,
            ("energy", "k1") => cfg.energy.k1 = num(value)?,
            ("energy", "k2") => cfg.energy.k2 = num(value)?,
            ("transport", "d_tilde" | "d") => cfg.transport.d_tilde = num(value)?,
            ("transport", "d0") => {
                cfg.transport.d0 = if value == "inf" { None } else { Some(num(value)?) };
            }
            ("transport", "d1") => cfg.transport.d1 = num(value)?,
            ("transport", "d2") => cfg.transport.d2 = num(value)?,
            ("transport", "a_phi") => cfg.transport.a_phi = num(value)?,
            ("transport", "temperature") => cfg.transport.temperature = num(value)?,
            ("transport", "molar_volume") => cfg.transport.molar_volume = num(value)?,
            ("time", "dt") => cfg.time.dt = num(value)?,
            ("time", "t_end") => cfg.time.t_end = num(value)?,
            ("time", "snapshot_stride") => cfg.time.snapshot_stride = int(value)?,
            ("ic", "kind") => {
                cfg.ic = match value {
                    "linear-ramp" => IcKind::LinearRamp,
                    "random-two-phase" => IcKind::RandomTwoPhase { beta_fraction: 0.5 },
                    "uniform" => IcKind::Uniform { value: 0.5 },
                    "cosine" => IcKind::Cosine { amplitude: 0.01 },
                    other => return Err(fail(format!("unknown ic kind {other:?}"))),
                };
            }
            ("ic", "seed") => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| fail(format!("invalid seed {value:?}")))?;
            }
            ("ic", "beta_fraction") => match &mut cfg.ic {
                IcKind::RandomTwoPhase { beta_fraction } => *beta_fraction = num(value)?,
                _ => return Err(fail("beta_fraction applies to random-two-phase".into())),
            },
            ("ic", "amplitude") => match &mut cfg.ic {
                IcKind::Cosine { amplitude } => *amplitude = num(value)?,
                _ => return Err(fail("amplitude applies to the cosine ic".into())),
            },
            ("ic", "value") => match &mut cfg.ic {
                IcKind::Uniform { value: v } => *v = num(value)?,
                _ => return Err(fail("value applies to the uniform ic".into())),
            },
            ("output", "dir") => cfg.output_dir = PathBuf::from(value),
            (sec, key) => return Err(fail(format!("unknown key {key} in section [{sec}]"))),
        }
    }
    cfg.validate().map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_case_ii_config() {
        let cfg = parse_config(
            "[energy]\nmodel = case-ii\nkappa = 0\n[time]\ndt = 1e-3\nt_end = 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.model, ModelKind::CaseII);
        assert_eq!(cfg.time.t_end, 0.1);
        // documented defaults fill the rest
        assert_eq!(cfg.mesh, MeshSpec::Interval { cells: 200, length: 1.0 });
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.energy.energy_scale, 1e5);
    }

    #[test]
    fn negative_kappa_names_the_invariant() {
        let err = parse_config("[energy]\nkappa = -1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kappa >= 0"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config("[mesh]\ncells = 10\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn preset_reference_equals_programmatic_preset() {
        let via_config = parse_config("preset = fig3\n").unwrap();
        let direct = crate::scenario::preset("fig3").unwrap();
        assert_eq!(via_config, direct);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = parse_config("# a comment\n\n[time]\ndt = 0.01 # trailing\nt_end = 0.05\n").unwrap();
        assert_eq!(cfg.time.dt, 0.01);
    }
}
