//! Simulation and verification library for a chain of diffusively coupled
//! Nagumo cells driven by three noise models: additive Langevin currents, a
//! deterministic thermostat on the membrane time scale, and the same
//! thermostat with an Ornstein–Uhlenbeck kick on the time-scale variable.
//!
//! * [`model`]: reaction term, potential, lattice energy and its derivatives.
//! * [`dynamics`]: vector fields and steppers.
//! * [`statistics`]: histograms, exact densities, time averages, monitors.
//! * [`oracle`]: closed-form stationarity residuals and a direct steady-state solver.
//! * [`experiment`]: multi-trajectory runs that feed the statistics.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod statistics;

pub use dynamics::{
    eta_drift, extended_rhs, gradient_flow_rhs, lambda_drift, langevin_step, ou_half_step,
    rk4_step, sdc_step, EtaMode, ExtendedState, ExtendedStepper, LangevinStepper, NoiseConfig,
};
pub use error::{Error, Result};
pub use experiment::{Experiment, Regime, RunConfig, RunOutput, TrajectoryOutput};
pub use model::{
    discrete_laplacian, energy_functional, energy_gradient, energy_hessian_diag,
    energy_hessian_trace, local_potential, local_potential_d1, local_potential_d2, reaction,
    BoundaryCondition, LatticeSpec, LatticeState, NonlinearityParams,
};
pub use oracle::{
    fp_residual_langevin, liouville_residual_extended, steady_state_1d, Perturbation, PhasePoint,
};
pub use rng::RngStream;
pub use statistics::{
    exact_density, fd_residual, first_integral, gaussian_check, l1_distance, DensityGrid, Estimate,
    GaussianReport, GaussianThresholds, Histogram, Moments, Observable, RunningAverages,
};
