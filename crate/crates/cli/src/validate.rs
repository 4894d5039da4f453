//! The `validate` property suite.
//!
//! Every check runs even when earlier ones fail; the verdict lists them all.

use std::time::Instant;

use nagumo_core::oracle::{fp_residual_langevin_with, liouville_residual_extended_with};
use nagumo_core::statistics::{exact_density_for, fd_quadrature_residual, histogram_l1};
use nagumo_core::{
    exact_density, fd_residual, gaussian_check, l1_distance, steady_state_1d, BoundaryCondition,
    EtaMode, Experiment, GaussianThresholds, LatticeSpec, NoiseConfig, NonlinearityParams,
    Observable, Perturbation, PhasePoint, Regime, RngStream, RunConfig, RunOutput,
};
use serde::{Deserialize, Serialize};

pub const ORACLE_POINTS: usize = 1000;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const CONTROL_MIN: f64 = 1e-2;
pub const STEADY_STATE_TOL: f64 = 1e-3;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const DRIFT_TOL: f64 = 1e-6;
pub const SE_FACTOR: f64 = 3.0;
pub const CROSS_MODEL_L1: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::judged(name, value < threshold, value, threshold, detail)
    }

    fn above(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::judged(name, value > threshold, value, threshold, detail)
    }

    fn judged(name: &str, ok: bool, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value: Some(value),
            threshold: Some(threshold),
            detail: detail.into(),
        }
    }

    fn failed(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            value: None,
            threshold: None,
            detail: detail.into(),
        }
    }

    fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            value: None,
            threshold: None,
            detail: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Trajectory length for the statistical checks.
    pub t_total: f64,
    /// Corrupt the η drift in the Liouville check (test hook).
    pub flip_h: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            t_total: 1e5,
            flip_h: false,
        }
    }
}

impl ValidateOptions {
    pub fn quick() -> Self {
        Self {
            t_total: 1e4,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub options: ValidateOptions,
    pub checks: Vec<Check>,
    pub wall_clock_seconds: f64,
}

impl Verdict {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let value = match (c.value, c.threshold) {
                (Some(v), Some(t)) => format!(" value={v:.3e} threshold={t:.1e}"),
                _ => String::new(),
            };
            s.push_str(&format!("{tag} {}{value} {}\n", c.name, c.detail));
        }
        s.push_str(if self.pass {
            "verdict: PASS\n"
        } else {
            "verdict: FAIL\n"
        });
        s
    }
}

fn params(alpha: f64) -> NonlinearityParams {
    NonlinearityParams::new(4.0, alpha).expect("valid parameters")
}

fn lattice() -> LatticeSpec {
    LatticeSpec::new(8, 1.0, BoundaryCondition::Neumann).expect("valid lattice")
}

fn random_point(spec: &LatticeSpec, mode: EtaMode, rng: &mut RngStream) -> PhasePoint {
    PhasePoint {
        u: (0..spec.n()).map(|_| rng.uniform(-0.5, 1.5)).collect(),
        lambda: rng.uniform(-2.0, 2.0),
        eta: (0..mode.eta_len(spec.n()))
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect(),
    }
}

/// `max |residual|` over random points, or the first error.
fn max_residual(
    points: usize,
    rng: &mut RngStream,
    mut f: impl FnMut(&mut RngStream) -> nagumo_core::Result<f64>,
) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let r = f(rng).map_err(|e| e.to_string())?;
        if !r.is_finite() {
            return Err(format!("non-finite residual {r}"));
        }
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

fn noise(gamma: f64, mode: EtaMode) -> NoiseConfig {
    NoiseConfig {
        gamma,
        eta_mode: mode,
        ..NoiseConfig::default()
    }
}

fn oracle_checks(opts: &ValidateOptions, checks: &mut Vec<Check>) {
    let p = params(0.25);
    let d = NoiseConfig::default().d;
    let mut rng = RngStream::new(opts.seed, 1_000);
    for (label, spec) in [
        ("single_cell", LatticeSpec::single_cell()),
        ("lattice8", lattice()),
    ] {
        let name = format!("fp_residual_langevin/{label}");
        let res = max_residual(ORACLE_POINTS, &mut rng, |r| {
            let pt = random_point(&spec, EtaMode::Independent, r);
            fp_residual_langevin_with(&pt.u, d, &spec, &p, Perturbation::NONE)
        });
        checks.push(match res {
            Ok(v) => Check::below(&name, v, RESIDUAL_TOL, "max over random points"),
            Err(e) => Check::failed(&name, e),
        });
        for gamma in [0.0, 1.0] {
            for mode in [EtaMode::Independent, EtaMode::Synchronous] {
                let cfg = noise(gamma, mode);
                let control = Perturbation {
                    flip_h: opts.flip_h,
                    ..Perturbation::NONE
                };
                let name = format!("liouville_residual/{label}/gamma={gamma}/{mode:?}");
                let res = max_residual(ORACLE_POINTS, &mut rng, |r| {
                    let pt = random_point(&spec, mode, r);
                    liouville_residual_extended_with(&pt, &cfg, &spec, &p, control)
                });
                checks.push(match res {
                    Ok(v) => Check::below(&name, v, RESIDUAL_TOL, "max over random points"),
                    Err(e) => Check::failed(&name, e),
                });
            }
        }
    }

    // negative controls must be detected
    let spec = LatticeSpec::single_cell();
    let cfg = noise(1.0, EtaMode::Independent);
    let controls = [
        ("flip_h", Perturbation::flip_h()),
        ("flip_g", Perturbation::flip_g()),
        ("halved_d_in_exponent", Perturbation::exponent_scale(0.5)),
    ];
    for (label, control) in controls {
        let name = format!("negative_control/liouville/{label}");
        let res = max_residual(ORACLE_POINTS, &mut rng, |r| {
            let pt = random_point(&spec, cfg.eta_mode, r);
            liouville_residual_extended_with(&pt, &cfg, &spec, &p, control)
        });
        checks.push(match res {
            Ok(v) => Check::above(&name, v, CONTROL_MIN, "corruption must be visible"),
            Err(e) => Check::failed(&name, e),
        });
    }
    let name = "negative_control/fp_langevin/halved_d_in_exponent";
    let res = max_residual(ORACLE_POINTS, &mut rng, |r| {
        let pt = random_point(&spec, EtaMode::Independent, r);
        fp_residual_langevin_with(&pt.u, d, &spec, &p, Perturbation::exponent_scale(0.5))
    });
    checks.push(match res {
        Ok(v) => Check::above(name, v, CONTROL_MIN, "corruption must be visible"),
        Err(e) => Check::failed(name, e),
    });
}

fn density_checks(checks: &mut Vec<Check>) {
    for alpha in [0.25, 0.5] {
        for d in [0.02, 0.04, 0.1] {
            let name = format!("steady_state_vs_exact/alpha={alpha}/D={d}");
            let p = params(alpha);
            let res = steady_state_1d(&p, d, -0.5, 1.5, 2001)
                .and_then(|s| exact_density(&p, d, -0.5, 1.5, 2001).and_then(|e| s.l1_to(&e)));
            checks.push(match res {
                Ok(v) => Check::below(&name, v, STEADY_STATE_TOL, "L1 at m = 2001"),
                Err(e) => Check::failed(&name, e.to_string()),
            });
        }
    }
    for alpha in [0.25, 0.5] {
        let name = format!("fd_quadrature_identity/alpha={alpha}");
        // wide enough that the boundary flux is negligible
        match fd_quadrature_residual(&params(alpha), 0.04, -2.0, 3.0, 20_001) {
            Ok(v) => checks.push(Check::below(&name, v.abs(), QUADRATURE_TOL, "")),
            Err(e) => checks.push(Check::failed(&name, e.to_string())),
        }
    }
}

fn run_experiment(
    spec: LatticeSpec,
    alpha: f64,
    noise: NoiseConfig,
    run: RunConfig,
) -> nagumo_core::Result<RunOutput> {
    Experiment {
        spec,
        params: params(alpha),
        noise,
        run,
    }
    .run()
}

fn first_integral_checks(opts: &ValidateOptions, checks: &mut Vec<Check>) {
    for (label, spec) in [
        ("single_cell", LatticeSpec::single_cell()),
        ("lattice8", lattice()),
    ] {
        for mode in [EtaMode::Independent, EtaMode::Synchronous] {
            let name = format!("first_integral/{label}/{mode:?}");
            let run = RunConfig {
                regime: Regime::Deterministic,
                dt: 1e-3,
                t_total: 1e3,
                burn_in: 0.0,
                record_stride: 100,
                seed: opts.seed,
                ..RunConfig::default()
            };
            let res = run_experiment(spec, 0.25, noise(0.0, mode), run);
            checks.push(match res {
                Ok(out) => {
                    let drift = out.first_integral_drift.unwrap_or(f64::INFINITY);
                    Check::judged(
                        &name,
                        drift <= DRIFT_TOL,
                        drift,
                        DRIFT_TOL,
                        "max |I(t) - I(0)|",
                    )
                }
                Err(e) => Check::failed(&name, e.to_string()),
            });
        }
    }
    checks.push(Check::skipped(
        "first_integral/gamma=1",
        "the OU kick on lambda breaks conservation; not checked for gamma > 0",
    ));
}

fn within(name: &str, est: nagumo_core::Estimate, detail: &str) -> Check {
    let z = est.value.abs() / est.std_error;
    Check::judged(
        name,
        est.within(SE_FACTOR),
        z,
        SE_FACTOR,
        format!("{detail} ({:.3e} ± {:.1e})", est.value, est.std_error),
    )
}

fn statistical_checks(opts: &ValidateOptions, checks: &mut Vec<Check>) {
    let alpha = 0.25;
    let spec = LatticeSpec::single_cell();
    let cfg = NoiseConfig::default();
    let run = |regime| RunConfig {
        regime,
        t_total: opts.t_total,
        seed: opts.seed,
        ..RunConfig::default()
    };
    let langevin = run_experiment(spec, alpha, cfg, run(Regime::Langevin));
    let sdc = run_experiment(spec, alpha, cfg, run(Regime::Sdc));

    for (label, out) in [("langevin", &langevin), ("sdc", &sdc)] {
        let name = format!("fd_residual/{label}");
        checks.push(match out {
            Ok(o) => match fd_residual(&o.averages, cfg.d) {
                Ok(est) => within(&name, est, "|z|"),
                Err(e) => Check::failed(&name, e.to_string()),
            },
            Err(e) => Check::failed(&name, e.to_string()),
        });
    }

    match &sdc {
        Ok(o) => {
            let thresholds = GaussianThresholds {
                min_samples: 100_000,
                ..GaussianThresholds::default()
            };
            let gauss = [
                (
                    "gaussian/lambda",
                    &o.lambda_moments,
                    Observable::Lambda,
                    cfg.lambda_variance(),
                ),
                (
                    "gaussian/eta",
                    &o.eta_moments,
                    Observable::Eta,
                    cfg.eta_variance(),
                ),
            ];
            for (name, moments, obs, var) in gauss {
                let se = o.averages.estimate(obs).std_error;
                checks.push(match gaussian_check(moments, Some(se), var, &thresholds) {
                    Ok(r) => Check {
                        name: name.into(),
                        status: if r.pass { Status::Pass } else { Status::Fail },
                        value: Some(r.variance),
                        threshold: Some(var),
                        detail: format!(
                            "n={} mean={:.2e} var={:.5} kurt={:.3}",
                            r.count, r.mean, r.variance, r.excess_kurtosis
                        ),
                    },
                    Err(e) => Check::failed(name, e.to_string()),
                });
            }
            checks.push(within(
                "lambda_hessian_average",
                o.averages.estimate(Observable::LambdaHess),
                "|z| of <lambda sum d2E>",
            ));
            checks.push(within(
                "eta_gradient_orthogonality",
                o.averages.estimate(Observable::EtaGrad),
                "|z| of <eta . grad E>",
            ));
            let l1 = exact_density_for(&o.histogram, &params(alpha), cfg.d, 8)
                .and_then(|g| l1_distance(&o.histogram, &g));
            checks.push(match l1 {
                Ok(v) => Check::below("sdc_vs_exact_density", v, 0.08, "L1"),
                Err(e) => Check::failed("sdc_vs_exact_density", e.to_string()),
            });
        }
        Err(e) => {
            for name in [
                "gaussian/lambda",
                "gaussian/eta",
                "lambda_hessian_average",
                "eta_gradient_orthogonality",
                "sdc_vs_exact_density",
            ] {
                checks.push(Check::failed(name, format!("sdc run failed: {e}")));
            }
        }
    }

    let name = "cross_model/langevin_vs_sdc";
    checks.push(match (&langevin, &sdc) {
        (Ok(a), Ok(b)) => match histogram_l1(&a.histogram, &b.histogram) {
            Ok(v) => Check::below(name, v, CROSS_MODEL_L1, "L1 between u-marginals"),
            Err(e) => Check::failed(name, e.to_string()),
        },
        _ => Check::failed(name, "a required run failed"),
    });
}

pub fn validate(opts: &ValidateOptions) -> Verdict {
    let start = Instant::now();
    let mut checks = Vec::new();
    oracle_checks(opts, &mut checks);
    density_checks(&mut checks);
    first_integral_checks(opts, &mut checks);
    statistical_checks(opts, &mut checks);
    Verdict {
        pass: checks.iter().all(|c| c.status != Status::Fail),
        options: *opts,
        checks,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    }
}
