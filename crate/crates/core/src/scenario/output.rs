use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::config::{IcKind, MeshSpec, ScenarioConfig};
use super::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::solver::NewtonConfig;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Fixed-order CSV of the per-step diagnostics; ternary runs append their
/// extra columns. Floats carry 17 significant digits.
pub fn write_diagnostics_csv(
    records: &[DiagnosticsRecord],
    ternary: bool,
    path: &Path,
) -> Result<()> {
    let mut out = String::from(
        "t,mass_total,free_energy,dissipation,min_xi,interface_width,newton_iters,min_x,max_x",
    );
    if ternary {
        out.push_str(",mass_x0,mass_x1,min_x0,max_x0");
    }
    out.push('\n');
    for r in records {
        let width = r.interface_width.map_or("nan".to_string(), fmt);
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt(r.time),
            fmt(r.mass_total),
            fmt(r.free_energy),
            fmt(r.dissipation),
            fmt(r.min_entropy_production),
            width,
            r.newton_iterations,
            fmt(r.min_x),
            fmt(r.max_x),
        );
        if ternary {
            let t = r.ternary.as_ref().expect("ternary record");
            let _ = write!(
                out,
                ",{},{},{},{}",
                fmt(t.mass_x0),
                fmt(t.mass_x1),
                fmt(t.min_x0),
                fmt(t.max_x0)
            );
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Records every effective parameter (including defaults) in the config
/// grammar, so a run can be reproduced from its metadata alone.
pub fn write_metadata(config: &ScenarioConfig, newton: &NewtonConfig, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# diffusim {} run metadata", env!("CARGO_PKG_VERSION"));
    if let Some(p) = &config.preset {
        let _ = writeln!(out, "# derived from preset {p}");
    }
    let _ = writeln!(
        out,
        "# solver: newton abs_tol={:e} rel_tol={:e} max_iterations={} max_halvings={}",
        newton.abs_tol, newton.rel_tol, newton.max_iterations, newton.max_halvings
    );
    let _ = writeln!(out, "[mesh]");
    match config.mesh {
        MeshSpec::Interval { cells, length } => {
            let _ = writeln!(out, "cells = {cells}");
            let _ = writeln!(out, "length = {length}");
        }
        MeshSpec::Square { nx, ny } => {
            let _ = writeln!(out, "cells = {nx},{ny}");
        }
    }
    let e = &config.energy;
    let _ = writeln!(out, "[energy]");
    let _ = writeln!(out, "model = {}", config.model.as_str());
    let _ = writeln!(out, "x_alpha = {}", e.x_alpha);
    let _ = writeln!(out, "x_beta = {}", e.x_beta);
    let _ = writeln!(out, "f_alpha = {}", e.f_alpha);
    let _ = writeln!(out, "f_beta = {}", e.f_beta);
    let _ = writeln!(out, "curvature = {}", e.curvature);
    let _ = writeln!(out, "interface_energy = {}", e.interface_energy);
    let _ = writeln!(out, "kappa = {}", e.kappa);
    let _ = writeln!(out, "energy_scale = {}", e.energy_scale);
    let _ = writeln!(out, "x_eq = {}", e.x_eq);
    let _ = writeln!(out, "vacancy_curvature = {}", e.vacancy_curvature);
    let _ = writeln!(out, "x0_eq = {}", e.x0_eq);
    let _ = writeln!(out, "k1 = {}", e.k1);
    let _ = writeln!(out, "k2 = {}", e.k2);
    let t = &config.transport;
    let _ = writeln!(out, "[transport]");
    let _ = writeln!(out, "d_tilde = {}", t.d_tilde);
    let _ = writeln!(out, "d0 = {}", t.d0.map_or("inf".to_string(), |d| d.to_string()));
    let _ = writeln!(out, "d1 = {}", t.d1);
    let _ = writeln!(out, "d2 = {}", t.d2);
    let _ = writeln!(out, "a_phi = {}", t.a_phi);
    let _ = writeln!(out, "temperature = {}", t.temperature);
    let _ = writeln!(out, "molar_volume = {}", t.molar_volume);
    let _ = writeln!(out, "[time]");
    let _ = writeln!(out, "dt = {}", config.time.dt);
    let _ = writeln!(out, "t_end = {}", config.time.t_end);
    let _ = writeln!(out, "snapshot_stride = {}", config.time.snapshot_stride);
    let _ = writeln!(out, "[ic]");
    let _ = writeln!(out, "kind = {}", config.ic.name());
    let _ = writeln!(out, "seed = {}", config.seed);
    match config.ic {
        IcKind::RandomTwoPhase { beta_fraction } => {
            let _ = writeln!(out, "beta_fraction = {beta_fraction}");
        }
        IcKind::Uniform { value } => {
            let _ = writeln!(out, "value = {value}");
        }
        IcKind::Cosine { amplitude } => {
            let _ = writeln!(out, "amplitude = {amplitude}");
        }
        IcKind::LinearRamp => {}
    }
    let _ = writeln!(out, "[output]");
    let _ = writeln!(out, "dir = {}", config.output_dir.display());
    write_text(path, &out)
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        }
    }
    let mut f = std::fs::File::create(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    f.write_all(content.as_bytes())
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trajectory_gives_header_only() {
        let dir = std::env::temp_dir().join("diffusim_csv_test");
        let path = dir.join("d.csv");
        write_diagnostics_csv(&[], false, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "t,mass_total,free_energy,dissipation,min_xi,interface_width,newton_iters,min_x,max_x\n"
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn metadata_reparses_to_the_same_config() {
        let cfg = crate::scenario::preset("fig3").unwrap();
        let dir = std::env::temp_dir().join("diffusim_meta_test");
        let path = dir.join("metadata.cfg");
        write_metadata(&cfg, &NewtonConfig::default(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let reparsed = crate::scenario::parse_config(&text).unwrap();
        // the preset marker is a comment in the metadata, everything else
        // round-trips exactly
        let mut expect = cfg.clone();
        expect.preset = None;
        assert_eq!(reparsed, expect);
        std::fs::remove_dir_all(&dir).ok();
    }
}
