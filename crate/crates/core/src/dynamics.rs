//! Vector fields and time steppers for the three noise models.
//!
//! * Langevin: `u̇_i = -∂_i E + √(2D) ξ_i`, Euler–Maruyama.
//! * Deterministic extended dynamics on `(u, λ, η, ζ)`:
//!
//!   ```text
//!   u̇_i = -λ ∂_i E + η_i
//!   λ̇   = (1/Q_λ) Σ_i [(∂_i E)² - D ∂_i² E]
//!   η̇_i = -(1/Q_η) ∂_i E            (independent)   or   η̇ = -(1/Q_η) Σ_j ∂_j E   (synchronous)
//!   ζ̇   = -λ Σ_i ∂_i² E
//!   ```
//!
//!   integrated with classical RK4.
//! * Stochastically ergodized variant: the λ equation gains `-γλ + √(2γD/Q_λ) ξ`,
//!   integrated by Strang splitting (exact OU half steps around one RK4 step).

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{
    gradient_into, hessian_diag_entry, LatticeSpec, LatticeState, NonlinearityParams,
};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    /// One current variable per node.
    #[default]
    Independent,
    /// A single current variable shared by every node.
    Synchronous,
}

impl EtaMode {
    pub fn eta_len(&self, n: usize) -> usize {
        match self {
            EtaMode::Independent => n,
            EtaMode::Synchronous => 1,
        }
    }
}

/// Noise intensity and thermostat parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub d: f64,
    pub q_lambda: f64,
    pub q_eta: f64,
    /// Ergodizing friction on λ; zero gives the purely deterministic dynamics.
    pub gamma: f64,
    pub eta_mode: EtaMode,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            d: 0.04,
            q_lambda: 1.0,
            q_eta: 1.0,
            gamma: 1.0,
            eta_mode: EtaMode::Independent,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        }
        positive("D", self.d)?;
        positive("Q_lambda", self.q_lambda)?;
        positive("Q_eta", self.q_eta)?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be non-negative, got {}", self.gamma),
            ));
        }
        Ok(())
    }

    /// Stationary variance of λ, `D / Q_λ`.
    pub fn lambda_variance(&self) -> f64 {
        self.d / self.q_lambda
    }

    /// Stationary variance of each η, `D / Q_η`.
    pub fn eta_variance(&self) -> f64 {
        self.d / self.q_eta
    }
}

/// Point of the extended phase space. Also used for time derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedState {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub eta: Vec<f64>,
    pub zeta: f64,
}

impl ExtendedState {
    /// `u = u0` everywhere, `λ = η = ζ = 0`.
    pub fn uniform(spec: &LatticeSpec, mode: EtaMode, u0: f64) -> Self {
        Self {
            u: vec![u0; spec.n()],
            lambda: 0.0,
            eta: vec![0.0; mode.eta_len(spec.n())],
            zeta: 0.0,
        }
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self {
            u: vec![0.0; other.u.len()],
            lambda: 0.0,
            eta: vec![0.0; other.eta.len()],
            zeta: 0.0,
        }
    }

    pub fn check_shape(&self, spec: &LatticeSpec, mode: EtaMode) -> Result<()> {
        check_len("u", spec.n(), self.u.len())?;
        check_len("eta", mode.eta_len(spec.n()), self.eta.len())
    }

    /// Name of the first non-finite variable, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        if let Some(i) = self.u.iter().position(|x| !x.is_finite()) {
            return Some(format!("u[{i}]"));
        }
        if !self.lambda.is_finite() {
            return Some("lambda".into());
        }
        if let Some(i) = self.eta.iter().position(|x| !x.is_finite()) {
            return Some(format!("eta[{i}]"));
        }
        if !self.zeta.is_finite() {
            return Some("zeta".into());
        }
        None
    }

    fn check_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            None => Ok(()),
            Some(variable) => Err(Error::Divergence {
                variable,
                time: None,
            }),
        }
    }

    /// `self = base + a * rate`
    fn set_axpy(&mut self, base: &Self, a: f64, rate: &Self) {
        for ((d, b), r) in self.u.iter_mut().zip(&base.u).zip(&rate.u) {
            *d = b + a * r;
        }
        self.lambda = base.lambda + a * rate.lambda;
        for ((d, b), r) in self.eta.iter_mut().zip(&base.eta).zip(&rate.eta) {
            *d = b + a * r;
        }
        self.zeta = base.zeta + a * rate.zeta;
    }
}

/// `u̇ = -∇E(u)`.
pub fn gradient_flow_rhs(
    u: &[f64],
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<Vec<f64>> {
    spec.check_state(u)?;
    let mut out = vec![0.0; u.len()];
    gradient_into(u, spec, p, &mut out);
    out.iter_mut().for_each(|x| *x = -*x);
    Ok(out)
}

/// `g(u) = (1/Q_λ) Σ_i [(∂_i E)² - D ∂_i² E]`.
pub fn lambda_drift(
    u: &[f64],
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<f64> {
    spec.check_state(u)?;
    let mut grad = vec![0.0; u.len()];
    gradient_into(u, spec, p, &mut grad);
    let (grad_sq, hess) = grad_sq_and_hess_trace(u, &grad, spec, p);
    Ok((grad_sq - cfg.d * hess) / cfg.q_lambda)
}

/// `h(u)`; length `n` for independent currents, 1 for synchronous.
pub fn eta_drift(
    u: &[f64],
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<Vec<f64>> {
    spec.check_state(u)?;
    let mut grad = vec![0.0; u.len()];
    gradient_into(u, spec, p, &mut grad);
    Ok(match cfg.eta_mode {
        EtaMode::Independent => grad.iter().map(|g| -g / cfg.q_eta).collect(),
        EtaMode::Synchronous => vec![-grad.iter().sum::<f64>() / cfg.q_eta],
    })
}

#[inline]
fn grad_sq_and_hess_trace(
    u: &[f64],
    grad: &[f64],
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> (f64, f64) {
    let mut grad_sq = 0.0;
    let mut hess = 0.0;
    for (i, g) in grad.iter().enumerate() {
        grad_sq += g * g;
        hess += hessian_diag_entry(u, i, spec, p);
    }
    (grad_sq, hess)
}

/// Evaluate the extended vector field into `out`, using `out.u` as gradient scratch.
fn extended_rhs_into(
    x: &ExtendedState,
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
    out: &mut ExtendedState,
) {
    gradient_into(&x.u, spec, p, &mut out.u);
    let (grad_sq, hess) = grad_sq_and_hess_trace(&x.u, &out.u, spec, p);
    let inv_q_eta = 1.0 / cfg.q_eta;
    match cfg.eta_mode {
        EtaMode::Independent => {
            for (i, g) in out.u.iter_mut().enumerate() {
                out.eta[i] = -*g * inv_q_eta;
                *g = -x.lambda * *g + x.eta[i];
            }
        }
        EtaMode::Synchronous => {
            let mut grad_sum = 0.0;
            let eta = x.eta[0];
            for g in out.u.iter_mut() {
                grad_sum += *g;
                *g = -x.lambda * *g + eta;
            }
            out.eta[0] = -grad_sum * inv_q_eta;
        }
    }
    out.lambda = (grad_sq - cfg.d * hess) / cfg.q_lambda;
    out.zeta = -x.lambda * hess;
}

/// Time derivative of the deterministic extended dynamics at `x`.
pub fn extended_rhs(
    x: &ExtendedState,
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<ExtendedState> {
    x.check_shape(spec, cfg.eta_mode)?;
    let mut out = ExtendedState::zeros_like(x);
    extended_rhs_into(x, cfg, spec, p, &mut out);
    Ok(out)
}

/// Exact Ornstein–Uhlenbeck update of λ alone over `dt / 2`:
/// `λ ← λ e^{-γ dt/2} + √((D/Q_λ)(1 - e^{-γ dt})) N(0,1)`.
#[inline]
pub fn ou_half_step(lambda: f64, dt: f64, cfg: &NoiseConfig, rng: &mut RngStream) -> f64 {
    let (decay, sd) = ou_coefficients(dt, cfg);
    lambda * decay + sd * rng.normal()
}

fn ou_coefficients(dt: f64, cfg: &NoiseConfig) -> (f64, f64) {
    let decay = (-0.5 * cfg.gamma * dt).exp();
    let sd = (cfg.lambda_variance() * (1.0 - decay * decay)).sqrt();
    (decay, sd)
}

/// Reusable RK4 / Strang-splitting integrator for the extended dynamics.
///
/// Owns its stage buffers so the hot loop does not allocate.
#[derive(Debug, Clone)]
pub struct ExtendedStepper {
    spec: LatticeSpec,
    params: NonlinearityParams,
    cfg: NoiseConfig,
    k: [ExtendedState; 4],
    stage: ExtendedState,
    // (dt, decay, sd) of the last OU half step
    ou_cache: (f64, f64, f64),
}

impl ExtendedStepper {
    pub fn new(spec: LatticeSpec, params: NonlinearityParams, cfg: NoiseConfig) -> Result<Self> {
        cfg.validate()?;
        let proto = ExtendedState::uniform(&spec, cfg.eta_mode, 0.0);
        Ok(Self {
            spec,
            params,
            cfg,
            k: std::array::from_fn(|_| proto.clone()),
            stage: proto,
            ou_cache: (f64::NAN, 0.0, 0.0),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn params(&self) -> &NonlinearityParams {
        &self.params
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.cfg
    }

    /// One classical RK4 step of the deterministic field, in place.
    pub fn rk4(&mut self, x: &mut ExtendedState, dt: f64) -> Result<()> {
        x.check_shape(&self.spec, self.cfg.eta_mode)?;
        let (spec, p, cfg) = (&self.spec, &self.params, &self.cfg);
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;

        extended_rhs_into(x, cfg, spec, p, k1);
        stage.set_axpy(x, 0.5 * dt, k1);
        extended_rhs_into(stage, cfg, spec, p, k2);
        stage.set_axpy(x, 0.5 * dt, k2);
        extended_rhs_into(stage, cfg, spec, p, k3);
        stage.set_axpy(x, dt, k3);
        extended_rhs_into(stage, cfg, spec, p, k4);

        let w = dt / 6.0;
        for i in 0..x.u.len() {
            x.u[i] += w * (k1.u[i] + 2.0 * k2.u[i] + 2.0 * k3.u[i] + k4.u[i]);
        }
        x.lambda += w * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda);
        for i in 0..x.eta.len() {
            x.eta[i] += w * (k1.eta[i] + 2.0 * k2.eta[i] + 2.0 * k3.eta[i] + k4.eta[i]);
        }
        x.zeta += w * (k1.zeta + 2.0 * k2.zeta + 2.0 * k3.zeta + k4.zeta);
        x.check_finite()
    }

    /// Strang step of the stochastically perturbed dynamics: OU half step on λ,
    /// RK4 on the deterministic field, OU half step on λ. With `γ = 0` no random
    /// numbers are drawn and the step is exactly [`ExtendedStepper::rk4`].
    pub fn sdc(&mut self, x: &mut ExtendedState, dt: f64, rng: &mut RngStream) -> Result<()> {
        if self.cfg.gamma == 0.0 {
            return self.rk4(x, dt);
        }
        if self.ou_cache.0 != dt {
            let (decay, sd) = ou_coefficients(dt, &self.cfg);
            self.ou_cache = (dt, decay, sd);
        }
        let (_, decay, sd) = self.ou_cache;
        x.lambda = x.lambda * decay + sd * rng.normal();
        self.rk4(x, dt)?;
        x.lambda = x.lambda * decay + sd * rng.normal();
        x.check_finite()
    }
}

/// Euler–Maruyama integrator for the additive-noise Langevin lattice.
#[derive(Debug, Clone)]
pub struct LangevinStepper {
    spec: LatticeSpec,
    params: NonlinearityParams,
    d: f64,
    grad: Vec<f64>,
}

impl LangevinStepper {
    pub fn new(spec: LatticeSpec, params: NonlinearityParams, d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid("D", format!("must be positive, got {d}")));
        }
        Ok(Self {
            spec,
            params,
            d,
            grad: vec![0.0; spec.n()],
        })
    }

    pub fn step(&mut self, u: &mut [f64], dt: f64, rng: &mut RngStream) -> Result<()> {
        self.spec.check_state(u)?;
        gradient_into(u, &self.spec, &self.params, &mut self.grad);
        let amp = (2.0 * self.d * dt).sqrt();
        for (x, g) in u.iter_mut().zip(&self.grad) {
            *x += -dt * g + amp * rng.normal();
        }
        match u.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::Divergence {
                variable: format!("u[{i}]"),
                time: None,
            }),
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("dt", format!("must be positive, got {dt}")))
    }
}

/// One RK4 step of the deterministic extended dynamics.
pub fn rk4_step(
    x: &ExtendedState,
    dt: f64,
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<ExtendedState> {
    check_dt(dt)?;
    let mut stepper = ExtendedStepper::new(*spec, *p, *cfg)?;
    let mut next = x.clone();
    stepper.rk4(&mut next, dt)?;
    Ok(next)
}

/// One Strang-split step of the stochastically perturbed extended dynamics.
pub fn sdc_step(
    x: &ExtendedState,
    dt: f64,
    cfg: &NoiseConfig,
    rng: &mut RngStream,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<ExtendedState> {
    check_dt(dt)?;
    let mut stepper = ExtendedStepper::new(*spec, *p, *cfg)?;
    let mut next = x.clone();
    stepper.sdc(&mut next, dt, rng)?;
    Ok(next)
}

/// One Euler–Maruyama step of the Langevin lattice.
pub fn langevin_step(
    u: &LatticeState,
    dt: f64,
    d: f64,
    rng: &mut RngStream,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<LatticeState> {
    check_dt(dt)?;
    let mut stepper = LangevinStepper::new(*spec, *p, d)?;
    let mut next = u.clone();
    stepper.step(&mut next, dt, rng)?;
    Ok(next)
}
