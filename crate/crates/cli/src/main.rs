use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nagumo_cli::commands::{self, FIG1_ALPHAS};
use nagumo_cli::{validate, CliError, ExperimentConfig, ValidateOptions, SEED_ENV};

/// Noise models for a chain of Nagumo cells.
#[derive(Debug, Parser)]
#[command(name = "nagumo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Overrides NAGUMO_SEED and the seed in the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-cell densities for α = 0.25 and 0.5 against the exact density.
    ReproduceFig1 {
        /// Run only this α.
        #[arg(long)]
        alpha: Option<f64>,
        /// t_total = 1e6 instead of 1e5.
        #[arg(long)]
        full_paper_scale: bool,
        #[arg(long, default_value = "fig1")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the property suite and report pass/fail for every check.
    Validate {
        /// Print the verdict as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shorter trajectories for smoke testing.
        #[arg(long, hide = true)]
        quick: bool,
        /// Corrupt the η drift in the Liouville check.
        #[arg(long, hide = true)]
        flip_h: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    match command {
        Command::Run { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply_seed_override(seed, env_seed.as_deref())?;
            if let Some(dir) = out {
                cfg.output.directory = dir;
            }
            let (summary, artifacts) = commands::run(&cfg)?;
            println!("wrote {}", artifacts.csv.display());
            println!("wrote {}", artifacts.summary.display());
            if let Some(p) = artifacts.plot {
                println!("wrote {}", p.display());
            }
            if let Some(l1) = summary.l1_to_exact {
                println!("L1 to exact density: {l1:.4}");
            }
            println!(
                "fd residual: {:.3e} ± {:.1e}",
                summary.fd_residual.value, summary.fd_residual.std_error
            );
            Ok(())
        }
        Command::ReproduceFig1 {
            alpha,
            full_paper_scale,
            out,
            seed,
        } => {
            let alphas = alpha.map_or(FIG1_ALPHAS.to_vec(), |a| vec![a]);
            let panels = commands::reproduce_fig1(
                &alphas,
                full_paper_scale,
                seed,
                env_seed.as_deref(),
                &out,
            )?;
            let mut ok = true;
            for p in &panels {
                println!(
                    "{} alpha={} L1={:.4} (< {}) mass_below_alpha={:.4} -> {}",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.alpha,
                    p.l1,
                    p.threshold,
                    p.mass_below_alpha,
                    p.directory.display()
                );
                ok &= p.pass;
            }
            if ok {
                Ok(())
            } else {
                Err(CliError::Validation("L1 above threshold".into()))
            }
        }
        Command::Validate {
            json,
            seed,
            quick,
            flip_h,
        } => {
            let base = if quick {
                ValidateOptions::quick()
            } else {
                ValidateOptions::default()
            };
            let verdict = validate(&ValidateOptions {
                seed,
                flip_h,
                ..base
            });
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&verdict).expect("verdict serializes")
                );
            } else {
                print!("{}", verdict.render_text());
            }
            if verdict.pass {
                Ok(())
            } else {
                let names: Vec<&str> = verdict.failures().map(|c| c.name.as_str()).collect();
                Err(CliError::Validation(names.join(", ")))
            }
        }
    }
}
