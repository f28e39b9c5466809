use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use diffusim::scenario::{parse_config, preset, run_scenario, MeshSpec, ScenarioConfig};

/// Diffusional phase-transformation simulations from a config file or a
/// named preset scenario.
#[derive(Parser, Debug)]
#[command(name = "simulate", version, about)]
struct Args {
    /// Path to a scenario configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named preset scenario (fig2, fig3, fig4, fig6, fig8, fig9, fig10, fig11).
    #[arg(long)]
    preset: Option<String>,

    /// Output directory.
    #[arg(long, default_value = "./out")]
    out: PathBuf,

    /// Random seed for seeded initial conditions.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Time-step override (seconds).
    #[arg(long)]
    dt: Option<f64>,

    /// Horizon override (seconds).
    #[arg(long)]
    t_end: Option<f64>,

    /// Mesh override: `n` (1-D) or `nx,ny` (2-D).
    #[arg(long)]
    mesh: Option<String>,
}

fn build_config(args: &Args) -> Result<ScenarioConfig, String> {
    let mut cfg = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        parse_config(&text).map_err(|e| e.to_string())?
    } else if let Some(name) = &args.preset {
        preset(name).map_err(|e| e.to_string())?
    } else {
        return Err("one of --config or --preset is required".into());
    };
    cfg.output_dir = args.out.clone();
    cfg.seed = args.seed;
    if let Some(dt) = args.dt {
        cfg.time.dt = dt;
    }
    if let Some(t_end) = args.t_end {
        cfg.time.t_end = t_end;
    }
    if let Some(mesh) = &args.mesh {
        cfg.mesh = if let Some((a, b)) = mesh.split_once(',') {
            let nx = a.trim().parse().map_err(|_| format!("bad mesh spec {mesh:?}"))?;
            let ny = b.trim().parse().map_err(|_| format!("bad mesh spec {mesh:?}"))?;
            MeshSpec::Square { nx, ny }
        } else {
            let cells = mesh.trim().parse().map_err(|_| format!("bad mesh spec {mesh:?}"))?;
            let length = match cfg.mesh {
                MeshSpec::Interval { length, .. } => length,
                _ => 1.0,
            };
            MeshSpec::Interval { cells, length }
        };
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(1);
        }
    };
    match run_scenario(&cfg) {
        Ok(summary) if summary.completed => {
            println!(
                "completed {} steps to t = {:.6} s; mass drift {:.3e}; artifacts in {}",
                summary.steps,
                summary.final_time,
                summary.mass_drift_rel,
                summary.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Ok(summary) => {
            eprintln!(
                "solver aborted at t = {:.6} s after {} steps: {}; partial artifacts in {}",
                summary.final_time,
                summary.steps,
                summary.abort_reason.as_deref().unwrap_or("unknown"),
                summary.output_dir.display()
            );
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("run failed: {err}");
            ExitCode::from(2)
        }
    }
}
