//! Multi-trajectory runs of one noise model with on-line statistics.
//!
//! Each trajectory gets its own [`RngStream`] `(seed, index)`, runs strictly
//! sequentially, and records every `record_stride` steps after `burn_in`.
//! Trajectories run in parallel; results are merged in index order so the
//! output does not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ExtendedState, ExtendedStepper, LangevinStepper, NoiseConfig};
use crate::error::{Error, Result};
use crate::model::{
    energy_unchecked, gradient_into, hessian_trace_unchecked, LatticeSpec, NonlinearityParams,
};
use crate::rng::RngStream;
use crate::statistics::{extended_record, langevin_record, Histogram, Moments, RunningAverages};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Additive noise on every node, Euler–Maruyama.
    Langevin,
    /// Extended dynamics without the λ kick (γ ignored), RK4.
    Deterministic,
    /// Extended dynamics with the OU perturbation of λ, Strang splitting.
    Sdc,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Langevin => "langevin",
            Regime::Deterministic => "deterministic",
            Regime::Sdc => "sdc",
        }
    }
}

/// Integration, recording and sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub regime: Regime,
    pub dt: f64,
    /// Total simulated time per trajectory, burn-in included.
    pub t_total: f64,
    pub burn_in: f64,
    pub record_stride: u64,
    pub seed: u64,
    pub trajectories: usize,
    /// Initial potential on every node; `None` starts at the threshold α.
    pub u0: Option<f64>,
    /// Initial currents η(0): drawn from N(0, D/Q_η) when true, zero otherwise.
    pub random_eta0: bool,
    /// Warn once per trajectory when |λ| exceeds this value.
    pub lambda_warn: f64,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Sdc,
            dt: 1e-3,
            t_total: 1e5,
            burn_in: 1e3,
            record_stride: 10,
            seed: 0,
            trajectories: 1,
            u0: None,
            random_eta0: true,
            lambda_warn: 50.0,
            bins: 50,
            lo: -0.5,
            hi: 1.5,
        }
    }
}

impl RunConfig {
    pub fn total_steps(&self) -> u64 {
        (self.t_total / self.dt).round() as u64
    }

    pub fn burn_in_steps(&self) -> u64 {
        (self.burn_in / self.dt).round() as u64
    }

    /// Records per trajectory.
    pub fn records(&self) -> u64 {
        (self.total_steps() - self.burn_in_steps()) / self.record_stride
    }
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub spec: LatticeSpec,
    pub params: NonlinearityParams,
    pub noise: NoiseConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOutput {
    pub index: usize,
    pub seed: u64,
    pub stream: u64,
    pub histogram: Histogram,
    pub averages: RunningAverages,
    pub lambda_moments: Moments,
    pub eta_moments: Moments,
    /// `max |I(t) - I(0)|` over every step; deterministic regime only.
    pub first_integral_drift: Option<f64>,
    pub max_abs_lambda: f64,
    pub final_u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub histogram: Histogram,
    pub averages: RunningAverages,
    pub lambda_moments: Moments,
    pub eta_moments: Moments,
    pub first_integral_drift: Option<f64>,
    pub max_abs_lambda: f64,
    pub trajectories: Vec<TrajectoryOutput>,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        let r = &self.run;
        if !(r.dt.is_finite() && r.dt > 0.0) {
            return Err(Error::invalid(
                "run.dt",
                format!("must be positive, got {}", r.dt),
            ));
        }
        if !(r.burn_in.is_finite() && r.burn_in >= 0.0) {
            return Err(Error::invalid("run.burn_in", "must be non-negative"));
        }
        if !(r.t_total.is_finite() && r.t_total > r.burn_in) {
            return Err(Error::invalid("run.t_total", "must exceed run.burn_in"));
        }
        if r.record_stride == 0 {
            return Err(Error::invalid("run.record_stride", "must be at least 1"));
        }
        if r.trajectories == 0 {
            return Err(Error::invalid("run.trajectories", "must be at least 1"));
        }
        if r.records() == 0 {
            return Err(Error::invalid(
                "run.record_stride",
                "no samples would be recorded after burn-in",
            ));
        }
        if let Some(u0) = r.u0 {
            if !u0.is_finite() {
                return Err(Error::invalid("run.u0", "must be finite"));
            }
        }
        Histogram::new(r.lo, r.hi, r.bins).map(|_| ())
    }

    /// Run every trajectory and merge the statistics in index order.
    pub fn run(&self) -> Result<RunOutput> {
        self.validate()?;
        let outputs: Vec<TrajectoryOutput> = (0..self.run.trajectories)
            .into_par_iter()
            .map(|i| self.run_trajectory(i))
            .collect::<Result<_>>()?;

        let mut histogram = Histogram::new(self.run.lo, self.run.hi, self.run.bins)?;
        let mut averages = RunningAverages::for_records(self.run.records());
        let mut lambda_moments = Moments::new();
        let mut eta_moments = Moments::new();
        let mut drift: Option<f64> = None;
        let mut max_abs_lambda: f64 = 0.0;
        for t in &outputs {
            histogram.merge(&t.histogram)?;
            averages.merge(&t.averages);
            lambda_moments.merge(&t.lambda_moments);
            eta_moments.merge(&t.eta_moments);
            if let Some(d) = t.first_integral_drift {
                drift = Some(drift.map_or(d, |x| x.max(d)));
            }
            max_abs_lambda = max_abs_lambda.max(t.max_abs_lambda);
        }
        Ok(RunOutput {
            histogram,
            averages,
            lambda_moments,
            eta_moments,
            first_integral_drift: drift,
            max_abs_lambda,
            trajectories: outputs,
        })
    }

    /// Run trajectory `index` with stream `(seed, index)`.
    pub fn run_trajectory(&self, index: usize) -> Result<TrajectoryOutput> {
        self.validate()?;
        let mut rng = RngStream::new(self.run.seed, index as u64);
        let mut out = TrajectoryOutput {
            index,
            seed: self.run.seed,
            stream: index as u64,
            histogram: Histogram::new(self.run.lo, self.run.hi, self.run.bins)?,
            averages: RunningAverages::for_records(self.run.records()),
            lambda_moments: Moments::new(),
            eta_moments: Moments::new(),
            first_integral_drift: None,
            max_abs_lambda: 0.0,
            final_u: Vec::new(),
        };
        match self.run.regime {
            Regime::Langevin => self.langevin_trajectory(&mut rng, &mut out)?,
            Regime::Deterministic | Regime::Sdc => self.extended_trajectory(&mut rng, &mut out)?,
        }
        Ok(out)
    }

    fn u0(&self) -> f64 {
        self.run.u0.unwrap_or(self.params.alpha())
    }

    fn langevin_trajectory(&self, rng: &mut RngStream, out: &mut TrajectoryOutput) -> Result<()> {
        let (spec, p, run) = (&self.spec, &self.params, &self.run);
        let mut stepper = LangevinStepper::new(*spec, *p, self.noise.d)?;
        let mut u = vec![self.u0(); spec.n()];
        let mut grad = vec![0.0; spec.n()];
        let burn = run.burn_in_steps();
        for step in 1..=run.total_steps() {
            stepper
                .step(&mut u, run.dt, rng)
                .map_err(|e| e.at_time(step as f64 * run.dt))?;
            if step > burn && (step - burn) % run.record_stride == 0 {
                gradient_into(&u, spec, p, &mut grad);
                let record = langevin_record(
                    &grad,
                    hessian_trace_unchecked(&u, spec, p),
                    energy_unchecked(&u, spec, p),
                );
                out.averages.push(&record);
                u.iter().for_each(|&x| out.histogram.accumulate(x));
            }
        }
        out.final_u = u;
        Ok(())
    }

    fn extended_trajectory(&self, rng: &mut RngStream, out: &mut TrajectoryOutput) -> Result<()> {
        let (spec, p, run) = (&self.spec, &self.params, &self.run);
        let deterministic = run.regime == Regime::Deterministic;
        let noise = if deterministic {
            NoiseConfig {
                gamma: 0.0,
                ..self.noise
            }
        } else {
            self.noise
        };
        let mut stepper = ExtendedStepper::new(*spec, *p, noise)?;
        let mut x = ExtendedState::uniform(spec, noise.eta_mode, self.u0());
        if run.random_eta0 {
            let sd = noise.eta_variance().sqrt();
            x.eta.iter_mut().for_each(|e| *e = sd * rng.normal());
        }
        let mut grad = vec![0.0; spec.n()];
        let first_integral = |x: &ExtendedState| {
            energy_unchecked(&x.u, spec, p)
                + 0.5 * noise.q_lambda * x.lambda * x.lambda
                + 0.5 * noise.q_eta * x.eta.iter().map(|e| e * e).sum::<f64>()
                - noise.d * x.zeta
        };
        let i0 = first_integral(&x);
        let mut drift: f64 = 0.0;
        let mut warned = false;
        let burn = run.burn_in_steps();
        for step in 1..=run.total_steps() {
            let t = step as f64 * run.dt;
            stepper.sdc(&mut x, run.dt, rng).map_err(|e| e.at_time(t))?;
            if deterministic {
                drift = drift.max((first_integral(&x) - i0).abs());
            }
            let abs_lambda = x.lambda.abs();
            out.max_abs_lambda = out.max_abs_lambda.max(abs_lambda);
            if abs_lambda > run.lambda_warn && !warned {
                log::warn!(
                    "trajectory {}: |lambda| = {abs_lambda:.3} exceeds {} at t = {t}",
                    out.index,
                    run.lambda_warn
                );
                warned = true;
            }
            if step > burn && (step - burn) % run.record_stride == 0 {
                gradient_into(&x.u, spec, p, &mut grad);
                let record = extended_record(
                    &x,
                    &grad,
                    hessian_trace_unchecked(&x.u, spec, p),
                    energy_unchecked(&x.u, spec, p),
                    &noise,
                );
                out.averages.push(&record);
                x.u.iter().for_each(|&v| out.histogram.accumulate(v));
                out.lambda_moments.push(x.lambda);
                x.eta.iter().for_each(|&e| out.eta_moments.push(e));
            }
        }
        if deterministic {
            out.first_integral_drift = Some(drift);
        }
        out.final_u = x.u;
        Ok(())
    }
}
