//! Experiment configuration files.
//!
//! A config is a TOML document with four tables:
//!
//! ```toml
//! [model]
//! k = 4.0
//! alpha = 0.25
//! n = 1
//! l = 1.0
//! bc = "single_cell"      # neumann | periodic | single_cell
//!
//! [noise]
//! D = 0.04
//! q_lambda = 1.0
//! q_eta = 1.0
//! gamma = 1.0
//! eta_mode = "independent" # independent | synchronous
//!
//! [run]
//! regime = "sdc"           # langevin | deterministic | sdc
//! dt = 1e-3
//! t_total = 1e5
//! burn_in = 1e3
//! record_stride = 10
//! seed = 0
//! trajectories = 1
//!
//! [output]
//! directory = "out"
//! bins = 50
//! lo = -0.5
//! hi = 1.5
//! emit_plot_script = true
//! ```
//!
//! Every key is optional; missing keys take the defaults shown.

use std::path::{Path, PathBuf};

use nagumo_core::{
    BoundaryCondition, EtaMode, Experiment, LatticeSpec, NoiseConfig, NonlinearityParams, Regime,
    RunConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable overriding the config-file seed.
pub const SEED_ENV: &str = "NAGUMO_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub k: f64,
    pub alpha: f64,
    pub n: usize,
    pub l: f64,
    pub bc: BoundaryCondition,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            k: 4.0,
            alpha: 0.25,
            n: 1,
            l: 1.0,
            bc: BoundaryCondition::SingleCell,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(rename = "D", alias = "d")]
    pub d: f64,
    pub q_lambda: f64,
    pub q_eta: f64,
    pub gamma: f64,
    pub eta_mode: EtaMode,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        Self {
            d: n.d,
            q_lambda: n.q_lambda,
            q_eta: n.q_eta,
            gamma: n.gamma,
            eta_mode: n.eta_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub regime: Regime,
    pub dt: f64,
    pub t_total: f64,
    pub burn_in: f64,
    pub record_stride: u64,
    pub seed: u64,
    pub trajectories: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    pub random_eta0: bool,
    pub lambda_warn: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        let r = RunConfig::default();
        Self {
            regime: r.regime,
            dt: r.dt,
            t_total: r.t_total,
            burn_in: r.burn_in,
            record_stride: r.record_stride,
            seed: r.seed,
            trajectories: r.trajectories,
            u0: r.u0,
            random_eta0: r.random_eta0,
            lambda_warn: r.lambda_warn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub emit_plot_script: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            bins: 50,
            lo: -0.5,
            hi: 1.5,
            emit_plot_script: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub noise: NoiseSection,
    pub run: RunSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Apply the seed precedence: flag, then `NAGUMO_SEED`, then the file.
    pub fn apply_seed_override(
        &mut self,
        flag: Option<u64>,
        env: Option<&str>,
    ) -> Result<(), CliError> {
        if let Some(seed) = flag {
            self.run.seed = seed;
        } else if let Some(raw) = env {
            self.run.seed = raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{SEED_ENV}: expected an unsigned integer, got `{raw}`"
                ))
            })?;
        }
        Ok(())
    }

    /// Check every field, reporting the first offending key by its dotted name.
    pub fn validate(&self) -> Result<(), CliError> {
        self.to_experiment().map(|_| ())
    }

    pub fn to_experiment(&self) -> Result<Experiment, CliError> {
        let m = &self.model;
        let params = NonlinearityParams::new(m.k, m.alpha).map_err(|e| keyed("model", e))?;
        let spec = LatticeSpec::new(m.n, m.l, m.bc).map_err(|e| keyed("model", e))?;
        let n = &self.noise;
        let noise = NoiseConfig {
            d: n.d,
            q_lambda: n.q_lambda,
            q_eta: n.q_eta,
            gamma: n.gamma,
            eta_mode: n.eta_mode,
        };
        noise.validate().map_err(|e| keyed("noise", e))?;
        let r = &self.run;
        let o = &self.output;
        let experiment = Experiment {
            spec,
            params,
            noise,
            run: RunConfig {
                regime: r.regime,
                dt: r.dt,
                t_total: r.t_total,
                burn_in: r.burn_in,
                record_stride: r.record_stride,
                seed: r.seed,
                trajectories: r.trajectories,
                u0: r.u0,
                random_eta0: r.random_eta0,
                lambda_warn: r.lambda_warn,
                bins: o.bins,
                lo: o.lo,
                hi: o.hi,
            },
        };
        experiment.validate().map_err(|e| keyed("output", e))?;
        Ok(experiment)
    }
}

/// Turn a core parameter error into a config error naming the TOML key.
fn keyed(section: &str, e: nagumo_core::Error) -> CliError {
    match e {
        nagumo_core::Error::InvalidParameter { name, reason } => {
            let key = match name {
                "Q_lambda" => "q_lambda",
                "Q_eta" => "q_eta",
                other => other,
            };
            if key.contains('.') {
                CliError::Config(format!("{key}: {reason}"))
            } else {
                CliError::Config(format!("{section}.{key}: {reason}"))
            }
        }
        other => CliError::Config(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let e = cfg.to_experiment().unwrap();
        assert_eq!(e.run.bins, 50);
        assert_eq!(e.noise.d, 0.04);
    }

    #[test]
    fn parses_all_sections() {
        let text = r#"
            [model]
            alpha = 0.5
            n = 8
            l = 0.5
            bc = "neumann"
            [noise]
            D = 0.1
            eta_mode = "synchronous"
            gamma = 0.0
            [run]
            regime = "deterministic"
            t_total = 10.0
            burn_in = 0.0
            seed = 17
            [output]
            bins = 20
            directory = "somewhere"
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.model.bc, BoundaryCondition::Neumann);
        assert_eq!(cfg.noise.eta_mode, EtaMode::Synchronous);
        assert_eq!(cfg.run.regime, Regime::Deterministic);
        assert_eq!(cfg.run.seed, 17);
        let round = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn field_level_errors() {
        let err = ExperimentConfig::from_toml_str("[noise]\nD = -1.0\n").unwrap_err();
        assert!(err.to_string().contains("noise.D"), "{err}");
        let err =
            ExperimentConfig::from_toml_str("[run]\nt_total = 5.0\nburn_in = 10.0\n").unwrap_err();
        assert!(err.to_string().contains("run.t_total"), "{err}");
        let err = ExperimentConfig::from_toml_str("[model]\nalpah = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("alpah"), "{err}");
        let err = ExperimentConfig::from_toml_str("[output]\nbins = 0\n").unwrap_err();
        assert!(err.to_string().contains("output.bins"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn seed_precedence() {
        let mut cfg = ExperimentConfig::default();
        cfg.run.seed = 1;
        cfg.apply_seed_override(None, None).unwrap();
        assert_eq!(cfg.run.seed, 1);
        cfg.apply_seed_override(None, Some("22")).unwrap();
        assert_eq!(cfg.run.seed, 22);
        cfg.apply_seed_override(Some(333), Some("22")).unwrap();
        assert_eq!(cfg.run.seed, 333);
        assert!(cfg.apply_seed_override(None, Some("x")).is_err());
    }
}
