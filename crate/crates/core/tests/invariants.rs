//! Cross-module properties over randomly drawn parameters, through the public API only.

use nagumo_core::{
    exact_density, first_integral, fp_residual_langevin, liouville_residual_extended, rk4_step,
    sdc_step, steady_state_1d, BoundaryCondition, EtaMode, ExtendedState, LatticeSpec, NoiseConfig,
    NonlinearityParams, PhasePoint, RngStream,
};
use proptest::prelude::*;

fn bc() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![
        Just(BoundaryCondition::Neumann),
        Just(BoundaryCondition::Periodic)
    ]
}

fn mode() -> impl Strategy<Value = EtaMode> {
    prop_oneof![Just(EtaMode::Independent), Just(EtaMode::Synchronous)]
}

prop_compose! {
    fn setup()(
        n in 1usize..7,
        l in 0.0f64..2.0,
        bc in bc(),
        k in 0.5f64..6.0,
        alpha in 0.05f64..0.95,
        d in 0.01f64..0.5,
        q_lambda in 0.2f64..5.0,
        q_eta in 0.2f64..5.0,
        mode in mode(),
    ) -> (LatticeSpec, NonlinearityParams, NoiseConfig) {
        (
            LatticeSpec::new(n, l, bc).unwrap(),
            NonlinearityParams::new(k, alpha).unwrap(),
            NoiseConfig { d, q_lambda, q_eta, gamma: 0.0, eta_mode: mode },
        )
    }
}

fn state(spec: &LatticeSpec, cfg: &NoiseConfig, seed: u64) -> ExtendedState {
    let mut rng = RngStream::new(seed, 0);
    let mut x = ExtendedState::uniform(spec, cfg.eta_mode, 0.0);
    x.u.iter_mut().for_each(|u| *u = rng.uniform(-0.3, 1.3));
    x.lambda = rng.uniform(-1.0, 1.0);
    x.eta.iter_mut().for_each(|e| *e = rng.uniform(-0.5, 0.5));
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rk4_conserves_first_integral((spec, p, cfg) in setup(), seed in any::<u64>()) {
        let mut x = state(&spec, &cfg, seed);
        let i0 = first_integral(&x, &cfg, &spec, &p).unwrap();
        for _ in 0..500 {
            x = rk4_step(&x, 1e-3, &cfg, &spec, &p).unwrap();
        }
        let i1 = first_integral(&x, &cfg, &spec, &p).unwrap();
        prop_assert!((i1 - i0).abs() < 1e-8 * i0.abs().max(1.0), "{i0} -> {i1}");
    }

    #[test]
    fn sdc_without_friction_is_rk4((spec, p, cfg) in setup(), seed in any::<u64>()) {
        let x = state(&spec, &cfg, seed);
        let mut rng = RngStream::new(seed, 1);
        let a = sdc_step(&x, 1e-3, &cfg, &mut rng, &spec, &p).unwrap();
        let b = rk4_step(&x, 1e-3, &cfg, &spec, &p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn claimed_densities_are_stationary(
        (spec, p, cfg) in setup(),
        gamma in prop_oneof![Just(0.0), 0.1f64..3.0],
        seed in any::<u64>(),
    ) {
        let cfg = NoiseConfig { gamma, ..cfg };
        let x = state(&spec, &cfg, seed);
        let fp = fp_residual_langevin(&x.u, cfg.d, &spec, &p).unwrap();
        // residual terms scale like |∇E|²/D; compare against that size
        let scale = 1.0 + x.u.len() as f64 * p.k().powi(2) / cfg.d;
        prop_assert!(fp.abs() < 1e-12 * scale, "fp residual {fp}");
        let pt = PhasePoint { u: x.u.clone(), lambda: x.lambda, eta: x.eta.clone() };
        let lv = liouville_residual_extended(&pt, &cfg, &spec, &p).unwrap();
        prop_assert!(lv.abs() < 1e-12 * scale * (1.0 + gamma), "liouville residual {lv}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn steady_state_matches_exact_density(alpha in 0.1f64..0.9, d in 0.03f64..0.3) {
        let p = NonlinearityParams::new(4.0, alpha).unwrap();
        let s = steady_state_1d(&p, d, -0.5, 1.5, 2001).unwrap();
        let e = exact_density(&p, d, -0.5, 1.5, 2001).unwrap();
        let l1 = s.l1_to(&e).unwrap();
        prop_assert!(l1 < 1e-3, "L1 = {l1}");
    }
}
