//! Independent checks of the stationarity claims.
//!
//! The residual functions apply the Fokker–Planck / Liouville operators to the
//! claimed invariant densities in closed form and return `(𝓛*ρ)/ρ` at a point.
//! Each term is assembled from analytic derivatives and the terms are summed
//! without algebraic simplification, so a wrong sign anywhere shows up as an
//! O(1) residual. [`steady_state_1d`] solves the discretized single-cell
//! stationary equation directly and never touches `exp(-V/D)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EtaMode, NoiseConfig};
use crate::error::{check_len, Error, Result};
use crate::model::{
    energy_unchecked, gradient_into, hessian_diag_entry, local_potential_d1, LatticeSpec,
    NonlinearityParams,
};
use crate::statistics::{simpson, DensityGrid};

/// Point of the `(u, λ, η)` phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub eta: Vec<f64>,
}

/// Deliberate corruptions of the vector field or the measure, for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// Use `h = +∇E / Q_η` instead of `-∇E / Q_η`.
    pub flip_h: bool,
    /// Use `-g` for the λ drift.
    pub flip_g: bool,
    /// Evaluate the density as `exp(-Φ / (D · exponent_scale))`.
    pub exponent_scale: f64,
}

impl Perturbation {
    pub const NONE: Perturbation = Perturbation {
        flip_h: false,
        flip_g: false,
        exponent_scale: 1.0,
    };

    pub fn flip_h() -> Self {
        Self {
            flip_h: true,
            ..Self::NONE
        }
    }

    pub fn flip_g() -> Self {
        Self {
            flip_g: true,
            ..Self::NONE
        }
    }

    /// Density `exp(-Φ / (scale · D))`; `scale = 2` halves D's role in the exponent.
    pub fn exponent_scale(scale: f64) -> Self {
        Self {
            exponent_scale: scale,
            ..Self::NONE
        }
    }
}

impl Default for Perturbation {
    fn default() -> Self {
        Self::NONE
    }
}

/// `(𝓕*ρ∞)/ρ∞` for the Langevin lattice, with `ρ∞ ∝ exp(-E/D)` and
/// `𝓕*ρ = Σ_i ∂_i(∂_i E · ρ) + D Σ_i ∂_i² ρ`.
pub fn fp_residual_langevin(
    u: &[f64],
    d: f64,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<f64> {
    fp_residual_langevin_with(u, d, spec, p, Perturbation::NONE)
}

pub fn fp_residual_langevin_with(
    u: &[f64],
    d: f64,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
    control: Perturbation,
) -> Result<f64> {
    spec.check_state(u)?;
    let temp = d * control.exponent_scale;
    let mut grad = vec![0.0; u.len()];
    gradient_into(u, spec, p, &mut grad);
    let mut residual = 0.0;
    for (i, &g) in grad.iter().enumerate() {
        let h = hessian_diag_entry(u, i, spec, p);
        let dlog = -g / temp; // ∂_i ρ / ρ
        let d2 = dlog * dlog - h / temp; // ∂_i² ρ / ρ
                                         // drift term ∂_i(∂_i E ρ)/ρ
        residual += h + g * dlog;
        // diffusion term
        residual += d * d2;
    }
    Ok(residual)
}

/// `(𝓛*ρ∞)/ρ∞` for the extended dynamics (plus the OU generator on λ when
/// `γ > 0`), with `ρ∞ ∝ exp(-(E + ½Q_λλ² + ½Q_η Σ η²)/D)`.
pub fn liouville_residual_extended(
    pt: &PhasePoint,
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<f64> {
    liouville_residual_extended_with(pt, cfg, spec, p, Perturbation::NONE)
}

pub fn liouville_residual_extended_with(
    pt: &PhasePoint,
    cfg: &NoiseConfig,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
    control: Perturbation,
) -> Result<f64> {
    spec.check_state(&pt.u)?;
    check_len("eta", cfg.eta_mode.eta_len(spec.n()), pt.eta.len())?;
    let temp = cfg.d * control.exponent_scale;
    let n = pt.u.len();
    let mut grad = vec![0.0; n];
    gradient_into(&pt.u, spec, p, &mut grad);
    let hess: Vec<f64> = (0..n)
        .map(|i| hessian_diag_entry(&pt.u, i, spec, p))
        .collect();

    let eta_at = |i: usize| match cfg.eta_mode {
        EtaMode::Independent => pt.eta[i],
        EtaMode::Synchronous => pt.eta[0],
    };
    let h_sign = if control.flip_h { 1.0 } else { -1.0 };
    let h: Vec<f64> = match cfg.eta_mode {
        EtaMode::Independent => grad.iter().map(|gi| h_sign * gi / cfg.q_eta).collect(),
        EtaMode::Synchronous => vec![h_sign * grad.iter().sum::<f64>() / cfg.q_eta],
    };
    let g_sign = if control.flip_g { -1.0 } else { 1.0 };
    let g = g_sign
        * grad
            .iter()
            .zip(&hess)
            .map(|(gi, hi)| gi * gi - cfg.d * hi)
            .sum::<f64>()
        / cfg.q_lambda;

    let mut residual = 0.0;
    // -Σ_i ∂_{u_i}[(−λ ∂_i E + η_i) ρ] / ρ
    for i in 0..n {
        let velocity = -pt.lambda * grad[i] + eta_at(i);
        let div = -pt.lambda * hess[i];
        let dlog = -grad[i] / temp;
        residual -= div + velocity * dlog;
    }
    // -∂_λ[g ρ]/ρ ; g does not depend on λ
    let dlog_lambda = -cfg.q_lambda * pt.lambda / temp;
    residual -= g * dlog_lambda;
    // -Σ ∂_η[h ρ]/ρ ; h does not depend on η
    for (hj, &ej) in h.iter().zip(&pt.eta) {
        residual -= hj * (-cfg.q_eta * ej / temp);
    }
    if cfg.gamma > 0.0 {
        // γ ∂_λ[(λ + (D/Q_λ) ∂_λ) ρ] / ρ
        let d2_lambda = dlog_lambda * dlog_lambda - cfg.q_lambda / temp;
        residual += cfg.gamma * (1.0 + pt.lambda * dlog_lambda + cfg.d / cfg.q_lambda * d2_lambda);
    }
    Ok(residual)
}

/// Finite-difference version of [`fp_residual_langevin`]: applies the operator
/// to `exp(-(E(u) - E(u₀))/D)` by central differences with step `h`.
pub fn fp_residual_langevin_fd(
    u: &[f64],
    d: f64,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
    h: f64,
) -> Result<f64> {
    spec.check_state(u)?;
    let e0 = energy_unchecked(u, spec, p);
    let rho = |v: &[f64]| (-(energy_unchecked(v, spec, p) - e0) / d).exp();
    let mut grad = vec![0.0; u.len()];
    let flux = |v: &[f64], i: usize, grad: &mut Vec<f64>| {
        gradient_into(v, spec, p, grad);
        grad[i] * rho(v)
    };
    let mut residual = 0.0;
    let mut work = u.to_vec();
    for i in 0..u.len() {
        work[i] = u[i] + h;
        let fp = flux(&work, i, &mut grad);
        let rp = rho(&work);
        work[i] = u[i] - h;
        let fm = flux(&work, i, &mut grad);
        let rm = rho(&work);
        work[i] = u[i];
        residual += (fp - fm) / (2.0 * h) + d * (rp - 2.0 + rm) / (h * h);
    }
    Ok(residual)
}

/// Normalized stationary density of the single-cell Langevin equation from the
/// tridiagonal finite-volume discretization of `0 = (V'ρ + Dρ')'` with
/// zero-flux walls at `lo` and `hi`.
///
/// The singular system is made regular by pinning `ρ_0 = 1` in place of the
/// first (redundant) row. If the sweep hits a vanishing pivot the null vector
/// is found by power iteration on `I + τA` instead.
pub fn steady_state_1d(
    p: &NonlinearityParams,
    d: f64,
    lo: f64,
    hi: f64,
    m: usize,
) -> Result<DensityGrid> {
    if m < 100 {
        return Err(Error::invalid(
            "m",
            format!("need at least 100 grid points, got {m}"),
        ));
    }
    DensityGrid::check_grid(lo, hi, m)?;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::invalid("D", format!("must be positive, got {d}")));
    }
    let (sub, diag, sup) = fokker_planck_matrix(p, d, lo, hi, m);
    let rho = match pinned_thomas(&sub, &diag, &sup) {
        Some(r) => r,
        None => {
            log::warn!("tridiagonal sweep failed; falling back to power iteration");
            power_iteration(&sub, &diag, &sup)?
        }
    };
    normalize(rho, lo, hi)
}

/// Rows of `A ρ = 0` where row `j` is `(J_{j+½} − J_{j−½}) / h`,
/// `J_{j+½} = V'(u_{j+½}) (ρ_j + ρ_{j+1})/2 + D (ρ_{j+1} − ρ_j)/h`, and the
/// wall fluxes vanish.
fn fokker_planck_matrix(
    p: &NonlinearityParams,
    d: f64,
    lo: f64,
    hi: f64,
    m: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / (m - 1) as f64;
    // J_{j+½} = a_j ρ_j + b_j ρ_{j+1}
    let face: Vec<(f64, f64)> = (0..m - 1)
        .map(|j| {
            let v1 = local_potential_d1(lo + h * (j as f64 + 0.5), p);
            (0.5 * v1 - d / h, 0.5 * v1 + d / h)
        })
        .collect();
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    for j in 0..m {
        if j + 1 < m {
            diag[j] += face[j].0 / h;
            sup[j] += face[j].1 / h;
        }
        if j > 0 {
            diag[j] -= face[j - 1].1 / h;
            sub[j] -= face[j - 1].0 / h;
        }
    }
    (sub, diag, sup)
}

fn pinned_thomas(sub: &[f64], diag: &[f64], sup: &[f64]) -> Option<Vec<f64>> {
    let m = diag.len();
    let mut a = sub.to_vec();
    let mut b = diag.to_vec();
    let mut c = sup.to_vec();
    let mut rhs = vec![0.0; m];
    a[0] = 0.0;
    b[0] = 1.0;
    c[0] = 0.0;
    rhs[0] = 1.0;

    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    cp[0] = c[0] / b[0];
    dp[0] = rhs[0] / b[0];
    for j in 1..m {
        let den = b[j] - a[j] * cp[j - 1];
        if den.abs() < 1e-300 || !den.is_finite() {
            return None;
        }
        cp[j] = if j + 1 < m { c[j] / den } else { 0.0 };
        dp[j] = (rhs[j] - a[j] * dp[j - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = dp[m - 1];
    for j in (0..m - 1).rev() {
        x[j] = dp[j] - cp[j] * x[j + 1];
    }
    if x.iter().all(|v| v.is_finite() && *v >= 0.0) && x.iter().any(|v| *v > 0.0) {
        Some(x)
    } else {
        None
    }
}

/// Null vector of the discrete generator by iterating `ρ ← ρ + τ A ρ`.
fn power_iteration(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    // Gershgorin bound keeps I + τA non-negative
    let bound = (0..m)
        .map(|j| diag[j].abs() + sub[j].abs() + sup[j].abs())
        .fold(0.0, f64::max);
    let tau = 0.5 / bound;
    let mut rho = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    for _ in 0..(200 * m * m).min(50_000_000) {
        let mut change = 0.0;
        for j in 0..m {
            let mut a = diag[j] * rho[j];
            if j > 0 {
                a += sub[j] * rho[j - 1];
            }
            if j + 1 < m {
                a += sup[j] * rho[j + 1];
            }
            next[j] = rho[j] + tau * a;
            change += (tau * a).abs();
        }
        std::mem::swap(&mut rho, &mut next);
        if change < 1e-14 {
            return Ok(rho);
        }
    }
    Err(Error::Divergence {
        variable: "steady-state power iteration".into(),
        time: None,
    })
}

fn normalize(mut rho: Vec<f64>, lo: f64, hi: f64) -> Result<DensityGrid> {
    let m = rho.len();
    let h = (hi - lo) / (m - 1) as f64;
    let z = simpson(&rho, h);
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Divergence {
            variable: "steady-state normalization".into(),
            time: None,
        });
    }
    rho.iter_mut().for_each(|r| *r /= z);
    Ok(DensityGrid {
        lo,
        hi,
        grid: DensityGrid::uniform_grid(lo, hi, m),
        values: rho,
        norm: z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundaryCondition;
    use crate::rng::RngStream;
    use crate::statistics::exact_density;

    fn p(alpha: f64) -> NonlinearityParams {
        NonlinearityParams::new(4.0, alpha).unwrap()
    }

    #[test]
    fn langevin_residual_vanishes_single_cell() {
        let spec = LatticeSpec::single_cell();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..200 {
            let u = [rng.uniform(-0.5, 1.5)];
            let r = fp_residual_langevin(&u, 0.04, &spec, &p(0.25)).unwrap();
            assert!(r.abs() < 1e-10, "{r}");
        }
    }

    #[test]
    fn langevin_residual_negative_control() {
        let spec = LatticeSpec::single_cell();
        let r = fp_residual_langevin_with(
            &[1.2],
            0.04,
            &spec,
            &p(0.25),
            Perturbation::exponent_scale(2.0),
        )
        .unwrap();
        assert!(r.abs() > 1e-2);
    }

    #[test]
    fn langevin_residual_matches_finite_differences() {
        let spec = LatticeSpec::new(3, 0.5, BoundaryCondition::Neumann).unwrap();
        let mut rng = RngStream::new(2, 0);
        for _ in 0..50 {
            let u: Vec<f64> = (0..3).map(|_| rng.uniform(-0.5, 1.5)).collect();
            let fd = fp_residual_langevin_fd(&u, 0.1, &spec, &p(0.3), 1e-5).unwrap();
            assert!(fd.abs() < 1e-4, "{fd}");
        }
    }

    #[test]
    fn extended_residual_trivial_point() {
        let spec = LatticeSpec::single_cell();
        for mode in [EtaMode::Independent, EtaMode::Synchronous] {
            for gamma in [0.0, 1.0] {
                let cfg = NoiseConfig {
                    gamma,
                    eta_mode: mode,
                    ..NoiseConfig::default()
                };
                let pt = PhasePoint {
                    u: vec![0.25],
                    lambda: 0.0,
                    eta: vec![0.0],
                };
                let r = liouville_residual_extended(&pt, &cfg, &spec, &p(0.25)).unwrap();
                assert!(r.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extended_residual_flip_controls() {
        let spec = LatticeSpec::single_cell();
        let cfg = NoiseConfig::default();
        let pt = PhasePoint {
            u: vec![0.8],
            lambda: 0.1,
            eta: vec![0.15],
        };
        let ok = liouville_residual_extended(&pt, &cfg, &spec, &p(0.25)).unwrap();
        assert!(ok.abs() < 1e-12);
        for control in [
            Perturbation::flip_h(),
            Perturbation::flip_g(),
            Perturbation::exponent_scale(2.0),
        ] {
            let r = liouville_residual_extended_with(&pt, &cfg, &spec, &p(0.25), control).unwrap();
            assert!(r.abs() > 1e-2, "{control:?}: {r}");
        }
        let bad = PhasePoint {
            eta: vec![0.0, 0.0],
            ..pt
        };
        assert!(liouville_residual_extended(&bad, &cfg, &spec, &p(0.25)).is_err());
    }

    #[test]
    fn normalized_residual_ignores_density_scale() {
        // (𝓕*(cρ))/(cρ) by finite differences for very different constants c
        let spec = LatticeSpec::single_cell();
        let q = p(0.25);
        let d = 0.05;
        let u = 0.9;
        let h = 1e-4;
        let normalized = |c: f64| {
            let rho = |x: f64| c * (-crate::model::local_potential(x, &q) / d).exp();
            let flux = |x: f64| local_potential_d1(x, &q) * rho(x);
            let op = (flux(u + h) - flux(u - h)) / (2.0 * h)
                + d * (rho(u + h) - 2.0 * rho(u) + rho(u - h)) / (h * h);
            op / rho(u)
        };
        let a = normalized(1.0);
        let b = normalized(1e6);
        assert!((a - b).abs() < 1e-6);
        assert!(a.abs() < 1e-4);
        let closed = fp_residual_langevin(&[u], d, &spec, &q).unwrap();
        assert!((closed - a).abs() < 1e-4);
    }

    #[test]
    fn steady_state_matches_exact_density() {
        for &alpha in &[0.25, 0.5] {
            for &d in &[0.04, 10.0] {
                let oracle = steady_state_1d(&p(alpha), d, -0.5, 1.5, 2001).unwrap();
                let exact = exact_density(&p(alpha), d, -0.5, 1.5, 2001).unwrap();
                let l1 = oracle.l1_to(&exact).unwrap();
                assert!(l1 < 1e-3, "alpha {alpha} D {d}: {l1}");
            }
        }
        assert!(steady_state_1d(&p(0.5), 0.04, -0.5, 1.5, 51).is_err());
    }

    #[test]
    fn power_iteration_fallback_agrees() {
        let (sub, diag, sup) = fokker_planck_matrix(&p(0.5), 0.1, -0.5, 1.5, 101);
        let direct = normalize(pinned_thomas(&sub, &diag, &sup).unwrap(), -0.5, 1.5).unwrap();
        let iterated = normalize(power_iteration(&sub, &diag, &sup).unwrap(), -0.5, 1.5).unwrap();
        let l1 = direct.l1_to(&iterated).unwrap();
        assert!(l1 < 1e-6, "{l1}");
    }
}
