//! `run` and `reproduce-fig1`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nagumo_core::{BoundaryCondition, EtaMode, Regime};
use serde::{Deserialize, Serialize};

use crate::artifacts::{bin_density, exact_grid, write_artifacts, Artifacts, RunSummary};
use crate::config::{ExperimentConfig, ModelSection, NoiseSection, OutputSection, RunSection};
use crate::error::CliError;

/// Run one experiment and return its summary without touching the disk.
pub fn execute(config: &ExperimentConfig) -> Result<(RunSummary, Option<Vec<f64>>), CliError> {
    let experiment = config.to_experiment()?;
    let start = Instant::now();
    log::info!(
        "running {} regime: n = {}, alpha = {}, D = {}, t_total = {}, {} trajectories",
        experiment.run.regime.name(),
        experiment.spec.n(),
        experiment.params.alpha(),
        experiment.noise.d,
        experiment.run.t_total,
        experiment.run.trajectories
    );
    let out = experiment.run()?;
    let summary = RunSummary::build(config, &experiment, &out, start.elapsed().as_secs_f64())?;
    let exact = match exact_grid(&experiment, &out.histogram)? {
        Some(grid) => Some(bin_density(&grid, &out.histogram)?),
        None => None,
    };
    Ok((summary, exact))
}

/// Run `config` and write its artifacts to `config.output.directory`.
pub fn run(config: &ExperimentConfig) -> Result<(RunSummary, Artifacts), CliError> {
    let (summary, exact) = execute(config)?;
    let title = format!(
        "{} regime, alpha = {}, D = {}",
        config.run.regime.name(),
        config.model.alpha,
        config.noise.d
    );
    let artifacts = write_artifacts(
        &config.output.directory,
        &summary,
        exact.as_deref(),
        config.output.emit_plot_script,
        &title,
    )?;
    Ok((summary, artifacts))
}

/// L1 thresholds for the single-cell density panels.
pub const FIG1_L1_DESK: f64 = 0.08;
pub const FIG1_L1_FULL: f64 = 0.03;
pub const FIG1_ALPHAS: [f64; 2] = [0.25, 0.5];

/// The single-cell sdc experiment behind the density figure.
pub fn fig1_config(alpha: f64, full_scale: bool, directory: PathBuf) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelSection {
            k: 4.0,
            alpha,
            n: 1,
            l: 0.0,
            bc: BoundaryCondition::SingleCell,
        },
        noise: NoiseSection {
            d: 0.04,
            q_lambda: 1.0,
            q_eta: 1.0,
            gamma: 1.0,
            eta_mode: EtaMode::Independent,
        },
        run: RunSection {
            regime: Regime::Sdc,
            dt: 1e-3,
            t_total: if full_scale { 1e6 } else { 1e5 },
            burn_in: 1e3,
            ..RunSection::default()
        },
        output: OutputSection {
            directory,
            bins: 50,
            lo: -0.5,
            hi: 1.5,
            emit_plot_script: true,
        },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fig1Panel {
    pub alpha: f64,
    pub directory: PathBuf,
    pub l1: f64,
    pub threshold: f64,
    pub mass_below_alpha: f64,
    pub pass: bool,
}

/// Run the requested panels (both α values by default), each in its own subdirectory.
pub fn reproduce_fig1(
    alphas: &[f64],
    full_scale: bool,
    seed: Option<u64>,
    env_seed: Option<&str>,
    out: &Path,
) -> Result<Vec<Fig1Panel>, CliError> {
    let threshold = if full_scale {
        FIG1_L1_FULL
    } else {
        FIG1_L1_DESK
    };
    let mut panels = Vec::new();
    for &alpha in alphas {
        let dir = out.join(format!("alpha_{alpha}"));
        let mut config = fig1_config(alpha, full_scale, dir.clone());
        config.apply_seed_override(seed, env_seed)?;
        let (summary, _) = run(&config)?;
        let l1 = summary
            .l1_to_exact
            .expect("single-cell runs always have an exact density");
        panels.push(Fig1Panel {
            alpha,
            directory: dir,
            l1,
            threshold,
            mass_below_alpha: summary.mass_below_alpha,
            pass: l1 < threshold,
        });
    }
    std::fs::create_dir_all(out)?;
    let json = serde_json::to_string_pretty(&panels).expect("panels serialize");
    std::fs::write(out.join("fig1.json"), json + "\n")?;
    Ok(panels)
}
