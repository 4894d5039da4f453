//! Run summaries and the files written next to them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nagumo_core::statistics::{exact_density_for, gaussian_check};
use nagumo_core::{
    fd_residual, l1_distance, DensityGrid, Estimate, Experiment, GaussianReport,
    GaussianThresholds, Histogram, Moments, Observable, Regime, RunOutput, RunningAverages,
};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.gp";

/// Simpson panels per histogram bin when averaging the exact density.
const EXACT_REFINE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegralReport {
    /// `max |I(t) - I(0)|` over the whole run.
    pub max_drift: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSection {
    pub report: Option<GaussianReport>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySeed {
    pub index: usize,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub records_per_trajectory: u64,
    pub total_records: u64,
    /// Time average of every observable with its batch-means standard error.
    pub averages: BTreeMap<String, Estimate>,
    /// `-⟨|∇E|²⟩ + D⟨ΔE⟩`; zero in the stationary state.
    pub fd_residual: Estimate,
    /// `⟨λ Σ ∂ᵢ²E⟩`; zero for the extended regimes.
    pub lambda_hessian: Option<Estimate>,
    /// `⟨η·∇E⟩`; zero for the extended regimes.
    pub eta_gradient: Option<Estimate>,
    /// Histogram vs. `exp(-V/D)`; only for uncoupled cells.
    pub l1_to_exact: Option<f64>,
    pub mass_below_alpha: f64,
    pub out_of_range_fraction: f64,
    pub first_integral: FirstIntegralReport,
    pub lambda_gaussian: GaussianSection,
    pub eta_gaussian: GaussianSection,
    pub max_abs_lambda: f64,
    pub trajectories: Vec<TrajectorySeed>,
    /// Raw inputs for every number above.
    pub raw: RawOutputs,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOutputs {
    pub histogram: Histogram,
    pub averages: RunningAverages,
    pub lambda_moments: Moments,
    pub eta_moments: Moments,
}

/// Exact single-cell density on a grid aligned with `histogram`, when it applies.
///
/// With no coupling every node is an independent cell, so the one-dimensional
/// density is the exact marginal. Otherwise there is no closed form.
pub fn exact_grid(
    experiment: &Experiment,
    histogram: &Histogram,
) -> Result<Option<DensityGrid>, CliError> {
    if !(experiment.spec.n() == 1 || experiment.spec.l() == 0.0) {
        return Ok(None);
    }
    let grid = exact_density_for(
        histogram,
        &experiment.params,
        experiment.noise.d,
        EXACT_REFINE,
    )?;
    Ok(Some(grid))
}

/// Bin-averaged values of `grid`, matching the histogram's density column.
pub fn bin_density(grid: &DensityGrid, histogram: &Histogram) -> Result<Vec<f64>, CliError> {
    let width = histogram.width();
    Ok(grid
        .bin_masses(histogram.bins())?
        .into_iter()
        .map(|m| m / width)
        .collect())
}

fn gaussian_section(
    moments: &Moments,
    se: f64,
    expected_var: f64,
    regime: Regime,
) -> GaussianSection {
    if regime == Regime::Langevin {
        return GaussianSection {
            report: None,
            skipped: Some("no thermostat variables in the langevin regime".into()),
        };
    }
    match gaussian_check(
        moments,
        Some(se),
        expected_var,
        &GaussianThresholds::default(),
    ) {
        Ok(report) => GaussianSection {
            report: Some(report),
            skipped: None,
        },
        Err(e) => GaussianSection {
            report: None,
            skipped: Some(e.to_string()),
        },
    }
}

impl RunSummary {
    pub fn build(
        config: &ExperimentConfig,
        experiment: &Experiment,
        out: &RunOutput,
        wall_clock_seconds: f64,
    ) -> Result<Self, CliError> {
        let regime = experiment.run.regime;
        let avg = &out.averages;
        let averages = Observable::ALL
            .iter()
            .map(|&o| (o.name().to_string(), avg.estimate(o)))
            .collect();
        let extended = regime != Regime::Langevin;
        let l1_to_exact = match exact_grid(experiment, &out.histogram)? {
            Some(grid) => Some(l1_distance(&out.histogram, &grid)?),
            None => None,
        };
        let first_integral = match out.first_integral_drift {
            Some(d) => FirstIntegralReport {
                max_drift: Some(d),
                skipped: None,
            },
            None => FirstIntegralReport {
                max_drift: None,
                skipped: Some(match regime {
                    Regime::Langevin => "not defined for the langevin regime".into(),
                    _ => format!(
                        "gamma = {} perturbs lambda, so I(t) is not conserved",
                        experiment.noise.gamma
                    ),
                }),
            },
        };
        let total = out.histogram.total();
        Ok(Self {
            config: config.clone(),
            records_per_trajectory: experiment.run.records(),
            total_records: avg.count(),
            averages,
            fd_residual: fd_residual(avg, experiment.noise.d)?,
            lambda_hessian: extended.then(|| avg.estimate(Observable::LambdaHess)),
            eta_gradient: extended.then(|| avg.estimate(Observable::EtaGrad)),
            l1_to_exact,
            mass_below_alpha: out.histogram.mass_below(experiment.params.alpha()),
            out_of_range_fraction: if total == 0 {
                0.0
            } else {
                out.histogram.out_of_range() as f64 / total as f64
            },
            first_integral,
            lambda_gaussian: gaussian_section(
                &out.lambda_moments,
                avg.estimate(Observable::Lambda).std_error,
                experiment.noise.lambda_variance(),
                regime,
            ),
            eta_gaussian: gaussian_section(
                &out.eta_moments,
                avg.estimate(Observable::Eta).std_error,
                experiment.noise.eta_variance(),
                regime,
            ),
            max_abs_lambda: out.max_abs_lambda,
            trajectories: out
                .trajectories
                .iter()
                .map(|t| TrajectorySeed {
                    index: t.index,
                    seed: t.seed,
                    stream: t.stream,
                })
                .collect(),
            raw: RawOutputs {
                histogram: out.histogram.clone(),
                averages: out.averages.clone(),
                lambda_moments: out.lambda_moments,
                eta_moments: out.eta_moments,
            },
            wall_clock_seconds,
        })
    }
}

/// `bin_left,bin_right,empirical_density,exact_density`, one row per bin.
///
/// `exact_density` is left empty when no closed form applies.
pub fn histogram_csv(histogram: &Histogram, exact: Option<&[f64]>) -> String {
    let mut s = String::from("bin_left,bin_right,empirical_density,exact_density\n");
    let empirical = histogram.density();
    for (i, emp) in empirical.iter().enumerate() {
        let (a, b) = histogram.edges(i);
        let _ = write!(s, "{a},{b},{emp},");
        if let Some(ex) = exact {
            let _ = write!(s, "{}", ex[i]);
        }
        s.push('\n');
    }
    s
}

/// Gnuplot script overlaying the two density columns of `csv_name`.
pub fn plot_script(csv_name: &str, title: &str, with_exact: bool) -> String {
    let mut s = format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 'u'\n\
         set ylabel 'density'\n\
         plot '{csv_name}' using (($1+$2)/2):3 with boxes title 'empirical'"
    );
    if with_exact {
        let _ = write!(
            s,
            ", \\\n     '{csv_name}' using (($1+$2)/2):4 with lines lw 2 title 'exact'"
        );
    }
    s.push('\n');
    s
}

/// Paths written by [`write_artifacts`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

pub fn write_artifacts(
    dir: &Path,
    summary: &RunSummary,
    exact: Option<&[f64]>,
    emit_plot_script: bool,
    title: &str,
) -> Result<Artifacts, CliError> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(HISTOGRAM_FILE);
    std::fs::write(&csv, histogram_csv(&summary.raw.histogram, exact))?;
    let summary_path = dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(&summary_path, json + "\n")?;
    let plot = if emit_plot_script {
        let path = dir.join(PLOT_FILE);
        std::fs::write(&path, plot_script(HISTOGRAM_FILE, title, exact.is_some()))?;
        Some(path)
    } else {
        None
    };
    Ok(Artifacts {
        csv,
        summary: summary_path,
        plot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut h = Histogram::new(0.0, 1.0, 4).unwrap();
        for x in [0.1, 0.3, 0.3, 0.9] {
            h.accumulate(x);
        }
        let csv = histogram_csv(&h, None);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "bin_left,bin_right,empirical_density,exact_density"
        );
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "0.25,0.5,2,");
        assert!(csv.ends_with('\n'));
        let with = histogram_csv(&h, Some(&[1.0, 1.0, 1.0, 1.0]));
        assert!(with.lines().nth(1).unwrap().ends_with(",1"));
    }

    #[test]
    fn plot_script_references_columns() {
        let s = plot_script("h.csv", "t", true);
        assert!(s.contains(":3") && s.contains(":4"));
        assert!(!plot_script("h.csv", "t", false).contains(":4"));
    }
}
