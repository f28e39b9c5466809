use std::path::PathBuf;

use super::config::{
    EnergyConfig, IcKind, MeshSpec, ModelKind, ScenarioConfig, TimeConfig, TransportConfig,
};
use crate::error::{Error, Result};

/// Named scenarios reproducing the canonical benchmark settings.
///
/// One-dimensional presets: linearly rising mole fraction over a 0.7 mm
/// domain (the length at which the 0.2 s horizon reaches the plateau
/// states), interdiffusion coefficient 1 mm^2/s, horizon 0.2 s. Two-dimensional
/// presets: random fully separated pattern on the unit square, horizon
/// 0.1 s. The ternary preset uses unequal alloy diffusivities so the
/// vacancy flux must compensate the imbalance.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let base_1d = ScenarioConfig {
        preset: Some(name.to_string()),
        model: ModelKind::CahnHilliard,
        mesh: MeshSpec::Interval { cells: 200, length: 0.7 },
        energy: EnergyConfig::default(),
        transport: TransportConfig::default(),
        time: TimeConfig { dt: 1e-3, t_end: 0.2, snapshot_stride: 10 },
        ic: IcKind::LinearRamp,
        seed: 42,
        output_dir: PathBuf::from("./out"),
    };
    let base_2d = ScenarioConfig {
        mesh: MeshSpec::Square { nx: 64, ny: 64 },
        time: TimeConfig { dt: 1e-3, t_end: 0.1, snapshot_stride: 10 },
        ic: IcKind::RandomTwoPhase { beta_fraction: 0.5 },
        ..base_1d.clone()
    };
    let cfg = match name {
        "fig2" => ScenarioConfig {
            energy: EnergyConfig { kappa: 5.0, ..EnergyConfig::default() },
            ..base_1d
        },
        "fig3" => ScenarioConfig {
            model: ModelKind::CaseII,
            energy: EnergyConfig { kappa: 0.0, ..EnergyConfig::default() },
            ..base_1d
        },
        "fig4" => ScenarioConfig {
            model: ModelKind::CaseI,
            energy: EnergyConfig { kappa: 5.0, ..EnergyConfig::default() },
            ..base_1d
        },
        "fig6" => ScenarioConfig {
            energy: EnergyConfig { kappa: 100.0, ..EnergyConfig::default() },
            ..base_1d
        },
        "fig8" => ScenarioConfig {
            energy: EnergyConfig { kappa: 1.0, ..EnergyConfig::default() },
            ..base_2d
        },
        "fig9" => ScenarioConfig {
            model: ModelKind::CaseII,
            energy: EnergyConfig { kappa: 0.0, ..EnergyConfig::default() },
            ..base_2d
        },
        "fig10" => ScenarioConfig {
            model: ModelKind::CaseI,
            energy: EnergyConfig { kappa: 1.0, ..EnergyConfig::default() },
            ..base_2d
        },
        "fig11" => ScenarioConfig {
            model: ModelKind::TernaryVacancy,
            energy: EnergyConfig { kappa: 0.0, ..EnergyConfig::default() },
            transport: TransportConfig {
                d0: None,
                d1: 2.0,
                d2: 1.0,
                ..TransportConfig::default()
            },
            ..base_2d
        },
        other => return Err(Error::invalid(format!("unknown preset {other:?}"))),
    };
    Ok(cfg)
}

pub const PRESET_NAMES: [&str; 8] =
    ["fig2", "fig3", "fig4", "fig6", "fig8", "fig9", "fig10", "fig11"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parameter_values() {
        let fig2 = preset("fig2").unwrap();
        assert_eq!(fig2.energy.kappa, 5.0);
        assert_eq!(fig2.transport.d_tilde, 1.0);
        assert_eq!(fig2.time.t_end, 0.2);
        assert_eq!(fig2.model, ModelKind::CahnHilliard);

        let fig3 = preset("fig3").unwrap();
        assert_eq!(fig3.energy.kappa, 0.0);
        assert_eq!(fig3.model, ModelKind::CaseII);

        let fig11 = preset("fig11").unwrap();
        assert_eq!(fig11.energy.x0_eq, 1e-3);
        assert_eq!(fig11.transport.d1, 2.0);
        assert_eq!(fig11.transport.d2, 1.0);
        assert_eq!(fig11.transport.d0, None);
        assert_eq!(fig11.model, ModelKind::TernaryVacancy);
        assert_eq!(fig11.time.t_end, 0.1);
    }

    #[test]
    fn all_presets_validate() {
        for name in PRESET_NAMES {
            preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(preset("fig7").is_err());
    }
}
