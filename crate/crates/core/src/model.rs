//! Nagumo reaction term, its potential, and the lattice energy functional.
//!
//! The lattice dynamics is a gradient flow `u̇ = -∇E(u)` of
//!
//! ```text
//! E[u] = Σ_bonds ½ l (u_i - u_{i-1})² + Σ_i V(u_i),    V' = -f,  V(0) = 0,
//! ```
//!
//! with the cubic bistable reaction `f(u) = -k u (u - α)(u - 1)`.
//! Everything here is a pure function of its arguments.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Cubic reaction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityParams {
    k: f64,
    alpha: f64,
}

impl NonlinearityParams {
    pub fn new(k: f64, alpha: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid("k", format!("must be positive, got {k}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 1), got {alpha}"),
            ));
        }
        Ok(Self { k, alpha })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for NonlinearityParams {
    fn default() -> Self {
        Self {
            k: 4.0,
            alpha: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Zero flux: the missing neighbour mirrors the edge node.
    Neumann,
    Periodic,
    /// A single uncoupled cell; `n = 1`, coupling ignored.
    SingleCell,
}

/// Size, coupling and closure of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    n: usize,
    l: f64,
    bc: BoundaryCondition,
}

impl LatticeSpec {
    pub fn new(n: usize, l: f64, bc: BoundaryCondition) -> Result<Self> {
        if bc == BoundaryCondition::SingleCell {
            return Ok(Self::single_cell());
        }
        if n == 0 {
            return Err(Error::invalid("n", "lattice needs at least one node"));
        }
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::invalid(
                "l",
                format!("must be non-negative, got {l}"),
            ));
        }
        Ok(Self { n, l, bc })
    }

    pub fn single_cell() -> Self {
        Self {
            n: 1,
            l: 0.0,
            bc: BoundaryCondition::SingleCell,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Effective coupling (zero for a single cell).
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// Number of bonds touching node `i` in the energy functional.
    pub fn bond_count(&self, i: usize) -> usize {
        match self.bc {
            BoundaryCondition::SingleCell => 0,
            BoundaryCondition::Periodic if self.n == 1 => 0,
            BoundaryCondition::Periodic => 2,
            BoundaryCondition::Neumann => usize::from(i > 0) + usize::from(i + 1 < self.n),
        }
    }

    pub fn check_state(&self, u: &[f64]) -> Result<()> {
        check_len("lattice state", self.n, u.len())
    }
}

/// Transmembrane potentials of every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState(pub Vec<f64>);

impl LatticeState {
    pub fn uniform(spec: &LatticeSpec, value: f64) -> Self {
        Self(vec![value; spec.n()])
    }
}

impl From<Vec<f64>> for LatticeState {
    fn from(u: Vec<f64>) -> Self {
        Self(u)
    }
}

impl Deref for LatticeState {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LatticeState {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `f(u) = -k u (u - α)(u - 1)`.
#[inline]
pub fn reaction(u: f64, p: &NonlinearityParams) -> f64 {
    -p.k * u * (u - p.alpha) * (u - 1.0)
}

/// `V(u) = k (u⁴/4 - (1+α) u³/3 + α u²/2)`, the antiderivative of `-f` with `V(0) = 0`.
#[inline]
pub fn local_potential(u: f64, p: &NonlinearityParams) -> f64 {
    let u2 = u * u;
    p.k * u2 * (0.25 * u2 - (1.0 + p.alpha) * u / 3.0 + 0.5 * p.alpha)
}

/// `V'(u) = -f(u)`.
#[inline]
pub fn local_potential_d1(u: f64, p: &NonlinearityParams) -> f64 {
    -reaction(u, p)
}

/// `V''(u) = k (3u² - 2(1+α) u + α)`.
#[inline]
pub fn local_potential_d2(u: f64, p: &NonlinearityParams) -> f64 {
    p.k * (3.0 * u * u - 2.0 * (1.0 + p.alpha) * u + p.alpha)
}

#[inline]
fn neighbours(u: &[f64], i: usize, bc: BoundaryCondition) -> (f64, f64) {
    let n = u.len();
    match bc {
        BoundaryCondition::Periodic => (u[(i + n - 1) % n], u[(i + 1) % n]),
        _ => {
            let left = if i == 0 { u[0] } else { u[i - 1] };
            let right = if i + 1 == n { u[n - 1] } else { u[i + 1] };
            (left, right)
        }
    }
}

pub(crate) fn laplacian_into(u: &[f64], spec: &LatticeSpec, out: &mut [f64]) {
    if spec.bc == BoundaryCondition::SingleCell {
        out.fill(0.0);
        return;
    }
    for (i, o) in out.iter_mut().enumerate() {
        let (left, right) = neighbours(u, i, spec.bc);
        *o = right - 2.0 * u[i] + left;
    }
}

/// Three-point discrete Laplacian under the lattice closure.
pub fn discrete_laplacian(u: &[f64], spec: &LatticeSpec) -> Result<Vec<f64>> {
    spec.check_state(u)?;
    let mut out = vec![0.0; u.len()];
    laplacian_into(u, spec, &mut out);
    Ok(out)
}

pub(crate) fn energy_unchecked(u: &[f64], spec: &LatticeSpec, p: &NonlinearityParams) -> f64 {
    let local: f64 = u.iter().map(|&x| local_potential(x, p)).sum();
    let n = u.len();
    let bonds: f64 = match spec.bc {
        BoundaryCondition::SingleCell => 0.0,
        BoundaryCondition::Neumann => u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum(),
        BoundaryCondition::Periodic => {
            let wrap = (u[0] - u[n - 1]).powi(2);
            u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() + wrap
        }
    };
    0.5 * spec.l * bonds + local
}

/// Lattice energy `E[u]`; the Lyapunov functional of the noiseless dynamics.
pub fn energy_functional(u: &[f64], spec: &LatticeSpec, p: &NonlinearityParams) -> Result<f64> {
    spec.check_state(u)?;
    Ok(energy_unchecked(u, spec, p))
}

pub(crate) fn gradient_into(
    u: &[f64],
    spec: &LatticeSpec,
    p: &NonlinearityParams,
    out: &mut [f64],
) {
    if spec.bc == BoundaryCondition::SingleCell {
        for (o, &x) in out.iter_mut().zip(u) {
            *o = local_potential_d1(x, p);
        }
        return;
    }
    let l = spec.l;
    for (i, o) in out.iter_mut().enumerate() {
        let (left, right) = neighbours(u, i, spec.bc);
        *o = -l * (right - 2.0 * u[i] + left) + local_potential_d1(u[i], p);
    }
}

/// `∂E/∂u_i = -l Δu_i + V'(u_i)`.
pub fn energy_gradient(u: &[f64], spec: &LatticeSpec, p: &NonlinearityParams) -> Result<Vec<f64>> {
    spec.check_state(u)?;
    let mut out = vec![0.0; u.len()];
    gradient_into(u, spec, p, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn hessian_diag_entry(
    u: &[f64],
    i: usize,
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> f64 {
    local_potential_d2(u[i], p) + spec.bond_count(i) as f64 * spec.l
}

pub(crate) fn hessian_trace_unchecked(
    u: &[f64],
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> f64 {
    (0..u.len())
        .map(|i| hessian_diag_entry(u, i, spec, p))
        .sum()
}

/// Diagonal of the Hessian of `E`: `V''(u_i) + l · (bonds at node i)`.
pub fn energy_hessian_diag(
    u: &[f64],
    spec: &LatticeSpec,
    p: &NonlinearityParams,
) -> Result<Vec<f64>> {
    spec.check_state(u)?;
    Ok((0..u.len())
        .map(|i| hessian_diag_entry(u, i, spec, p))
        .collect())
}

/// `Σ_i ∂²E/∂u_i²`.
pub fn energy_hessian_trace(u: &[f64], spec: &LatticeSpec, p: &NonlinearityParams) -> Result<f64> {
    spec.check_state(u)?;
    Ok(hessian_trace_unchecked(u, spec, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(k: f64, alpha: f64) -> NonlinearityParams {
        NonlinearityParams::new(k, alpha).unwrap()
    }

    fn neumann(n: usize, l: f64) -> LatticeSpec {
        LatticeSpec::new(n, l, BoundaryCondition::Neumann).unwrap()
    }

    #[test]
    fn reaction_roots_and_value() {
        let q = p(4.0, 0.25);
        assert_eq!(reaction(0.0, &q), 0.0);
        assert_eq!(reaction(0.25, &q), 0.0);
        assert_eq!(reaction(1.0, &q), 0.0);
        assert!((reaction(0.5, &q) - 0.25).abs() < 1e-15);
        assert!(reaction(0.1, &q) != 0.0);
    }

    #[test]
    fn potential_values() {
        assert_eq!(local_potential(0.0, &p(4.0, 0.3)), 0.0);
        assert!(local_potential(1.0, &p(4.0, 0.5)).abs() < 1e-15);
        assert!((local_potential(1.0, &p(4.0, 0.25)) + 1.0 / 6.0).abs() < 1e-15);
        assert!((local_potential_d2(0.0, &p(4.0, 0.25)) - 1.0).abs() < 1e-15);
        assert!((local_potential_d2(0.5, &p(4.0, 0.5)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(NonlinearityParams::new(0.0, 0.5).is_err());
        assert!(NonlinearityParams::new(4.0, 1.0).is_err());
        assert!(NonlinearityParams::new(4.0, 0.0).is_err());
        assert!(LatticeSpec::new(0, 1.0, BoundaryCondition::Neumann).is_err());
        assert!(LatticeSpec::new(3, -1.0, BoundaryCondition::Periodic).is_err());
        let sc = LatticeSpec::new(7, 3.0, BoundaryCondition::SingleCell).unwrap();
        assert_eq!(sc.n(), 1);
        assert_eq!(sc.l(), 0.0);
    }

    #[test]
    fn laplacian_cases() {
        let per = LatticeSpec::new(3, 1.0, BoundaryCondition::Periodic).unwrap();
        assert_eq!(discrete_laplacian(&[0.0, 1.0, 0.0], &per).unwrap()[1], -2.0);
        assert_eq!(
            discrete_laplacian(&[1.0, 0.0, 0.0], &neumann(3, 1.0)).unwrap()[0],
            -1.0
        );
        assert_eq!(
            discrete_laplacian(&[0.3; 5], &neumann(5, 1.0)).unwrap(),
            vec![0.0; 5]
        );
        assert_eq!(
            discrete_laplacian(&[0.7], &LatticeSpec::single_cell()).unwrap(),
            vec![0.0]
        );
        assert!(matches!(
            discrete_laplacian(&[0.0, 1.0], &per),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn energy_hand_values() {
        let q = p(4.0, 0.5);
        assert!(
            (energy_functional(&[0.0, 1.0], &neumann(2, 2.0), &q).unwrap() - 1.0).abs() < 1e-15
        );
        let v = local_potential(0.3, &q);
        assert_eq!(
            energy_functional(&[0.3], &LatticeSpec::single_cell(), &q).unwrap(),
            v
        );
        assert!(energy_functional(&[0.3, 0.1], &LatticeSpec::single_cell(), &q).is_err());
    }

    #[test]
    fn gradient_at_uniform_states() {
        let q = p(4.0, 0.25);
        let g = energy_gradient(&[0.25; 4], &neumann(4, 1.0), &q).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
        let g = energy_gradient(&[0.6; 4], &neumann(4, 1.0), &q).unwrap();
        for x in g {
            assert!((x + reaction(0.6, &q)).abs() < 1e-15);
        }
    }

    #[test]
    fn hessian_diag_hand_values() {
        let q = p(4.0, 0.25);
        let h = energy_hessian_diag(&[0.0; 3], &neumann(3, 1.0), &q).unwrap();
        assert_eq!(h, vec![2.0, 3.0, 2.0]);
        let h = energy_hessian_diag(&[0.4], &LatticeSpec::single_cell(), &q).unwrap();
        assert_eq!(h, vec![local_potential_d2(0.4, &q)]);
    }

    // Finite-difference oracles use a fixed pseudo-random sequence so failures reproduce.
    fn lcg_points(count: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..count)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                -0.5 + 2.0 * ((s >> 11) as f64 / (1u64 << 53) as f64)
            })
            .collect()
    }

    #[test]
    fn d2_matches_central_difference_of_potential() {
        let q = p(4.0, 0.3);
        let h = 1e-5;
        for u in lcg_points(20, 7) {
            let d1 = (local_potential(u + h, &q) - local_potential(u - h, &q)) / (2.0 * h);
            let d1_exact = local_potential_d1(u, &q);
            assert!((d1 - d1_exact).abs() <= 1e-6 * d1_exact.abs().max(1.0));
            let d2 = (local_potential_d1(u + h, &q) - local_potential_d1(u - h, &q)) / (2.0 * h);
            let d2_exact = local_potential_d2(u, &q);
            assert!(
                (d2 - d2_exact).abs() <= 1e-6 * d2_exact.abs().max(1.0),
                "u={u}"
            );
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let q = p(4.0, 0.25);
        let h = 1e-5;
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Periodic] {
            let spec = LatticeSpec::new(8, 0.7, bc).unwrap();
            for trial in 0..20 {
                let u = lcg_points(8, 100 + trial);
                let grad = energy_gradient(&u, &spec, &q).unwrap();
                let hess = energy_hessian_diag(&u, &spec, &q).unwrap();
                let e0 = energy_functional(&u, &spec, &q).unwrap();
                for i in 0..8 {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[i] += h;
                    dn[i] -= h;
                    let ep = energy_functional(&up, &spec, &q).unwrap();
                    let em = energy_functional(&dn, &spec, &q).unwrap();
                    let fd = (ep - em) / (2.0 * h);
                    assert!((fd - grad[i]).abs() <= 1e-6 * grad[i].abs().max(1.0));
                    let h2 = 1e-4;
                    up[i] = u[i] + h2;
                    dn[i] = u[i] - h2;
                    let ep = energy_functional(&up, &spec, &q).unwrap();
                    let em = energy_functional(&dn, &spec, &q).unwrap();
                    let fd2 = (ep - 2.0 * e0 + em) / (h2 * h2);
                    assert!(
                        (fd2 - hess[i]).abs() <= 1e-5 * hess[i].abs().max(1.0),
                        "bc={bc:?} i={i} fd2={fd2} exact={}",
                        hess[i]
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_potential_at_half_threshold(x in -2.0f64..2.0) {
            let q = p(4.0, 0.5);
            let a = local_potential(0.5 + x, &q);
            let b = local_potential(0.5 - x, &q);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn uniform_state_energy_reduces_to_local(c in -1.0f64..2.0, n in 1usize..10, l in 0.0f64..3.0) {
            let q = p(4.0, 0.3);
            for bc in [BoundaryCondition::Neumann, BoundaryCondition::Periodic] {
                let spec = LatticeSpec::new(n, l, bc).unwrap();
                let e = energy_functional(&vec![c; n], &spec, &q).unwrap();
                let expect = n as f64 * local_potential(c, &q);
                prop_assert!((e - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }

        #[test]
        fn reaction_vanishes_only_at_roots(u in -2.0f64..2.0) {
            let q = p(3.0, 0.4);
            let r = reaction(u, &q);
            if u != 0.0 && u != 0.4 && u != 1.0 {
                prop_assert!(r != 0.0);
            }
        }
    }
}
