//! Benchmark fixtures shared by the criterion targets.

use nagumo_core::{BoundaryCondition, LatticeSpec, NoiseConfig, NonlinearityParams};

pub fn params() -> NonlinearityParams {
    NonlinearityParams::new(4.0, 0.25).expect("valid parameters")
}

pub fn noise() -> NoiseConfig {
    NoiseConfig::default()
}

/// Single cell plus Neumann chains of increasing length.
pub fn lattices() -> Vec<(String, LatticeSpec)> {
    let mut v = vec![("n=1".to_string(), LatticeSpec::single_cell())];
    for n in [8, 64, 512] {
        v.push((
            format!("n={n}"),
            LatticeSpec::new(n, 1.0, BoundaryCondition::Neumann).expect("valid lattice"),
        ));
    }
    v
}

/// Deterministic, non-uniform initial potential in the bistable range.
pub fn initial_u(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 + 0.6 * ((i as f64) * 0.7).sin())
        .collect()
}
