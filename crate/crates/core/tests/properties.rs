use nalgebra::{Matrix6, Vector6};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use optomech::linear::{
    build_diffusion, build_drift, build_drift_with_quadratures, lyapunov_residual, physicality_floor, raw_occupation,
    solve_lyapunov, stability, LinearModel, Mode,
};
use optomech::params::{Detuning, ModelParams};
use optomech::steady_state::classical_fixed_point;
use optomech::validation::{random_generic, random_model};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn stable_model(seed: u64) -> Option<(ModelParams, LinearModel, optomech::steady_state::ClassicalSteadyState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let m = random_model(&mut rng);
        let Ok(s) = classical_fixed_point(&m) else { continue };
        let Ok(lm) = LinearModel::new(&m, &s) else { continue };
        if lm.stable {
            return Some((m, lm, s));
        }
    }
    None
}

fn params() -> impl Strategy<Value = ModelParams> {
    (
        1.0..30.0f64,
        0.05..0.95f64,
        -40.0..-0.5f64,
        0.0..1e9f64,
        (1e-4..1e-1f64, 1e-8..1e-2f64),
        (1e-5..1e-2f64, 1e-12..1e-8f64, 1e-4..1e-1f64),
        (0.0..1e5f64, 0.0..1e5f64),
    )
        .prop_map(
            |(w1, frac, delta, drive, (gamma1, gamma2), (g1, g2, chi), (n1, n2))| ModelParams {
                omega1: w1,
                omega2: frac * w1,
                gamma1,
                gamma2,
                g1,
                g2: -g2,
                chi,
                drive,
                n1,
                n2,
                detuning: Detuning::Effective(delta),
            },
        )
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn generic_lyapunov_residual_is_small(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, d) = random_generic(&mut rng).unwrap();
        let v = solve_lyapunov(&a, &d).unwrap();
        prop_assert!(lyapunov_residual(&a, &v, &d) < 1e-12);
        prop_assert!((v - v.transpose()).amax() <= 1e-12 * v.amax());
    }

    #[test]
    fn model_lyapunov_residual_is_small(seed in any::<u64>()) {
        if let Some((_, lm, _)) = stable_model(seed) {
            let v = solve_lyapunov(&lm.drift, &lm.diffusion).unwrap();
            prop_assert!(lyapunov_residual(&lm.drift, &v, &lm.diffusion) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(config(100))]

    /// With the linear and cross couplings off the sphere block decouples; it
    /// relaxes like a lone oscillator whose restoring force is stiffened by
    /// the photon number while its kinetic term is not.
    #[test]
    fn decoupled_sphere_matches_isolated_oscillator(mut m in params()) {
        m.chi = 0.0;
        m.g1 = 0.0;
        let Ok(s) = classical_fixed_point(&m) else { return Ok(()) };
        let lm = LinearModel::new(&m, &s).unwrap();
        prop_assume!(lm.stable);
        let v = lm.steady_covariance().unwrap().matrix();
        let half = m.n2 + 0.5;
        let scale = m.n2.max(1.0);
        prop_assert!((v[(5, 5)] - half).abs() <= 1e-9 * scale);
        prop_assert!((v[(4, 4)] - half * m.omega2 / s.omega2_eff).abs() <= 1e-9 * scale);
        for j in 0..4 {
            prop_assert!(v[(4, j)].abs() <= 1e-9 * scale && v[(5, j)].abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn decoupled_sphere_without_drive_is_thermal(mut m in params()) {
        m.chi = 0.0;
        m.g1 = 0.0;
        m.drive = 0.0;
        let s = classical_fixed_point(&m).unwrap();
        let c = LinearModel::new(&m, &s).unwrap().steady_covariance().unwrap();
        prop_assert!((c.n2_raw - m.n2).abs() <= 1e-9 * m.n2.max(1.0));
    }

    /// Rotating the input phase only rotates the cavity quadratures, so the
    /// mechanical block of the covariance is unchanged.
    #[test]
    fn mechanical_covariance_is_phase_invariant(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let Some((m, lm, s)) = stable_model(seed) else { return Ok(()) };
        let (x, _) = s.field_quadratures();
        let a = build_drift_with_quadratures(&m, &s, x * theta.cos(), x * theta.sin());
        let d = build_diffusion(&m);
        let v0 = solve_lyapunov(&lm.drift, &d).unwrap();
        let v1 = solve_lyapunov(&a, &d).unwrap();
        let scale = v0.fixed_view::<4, 4>(2, 2).amax();
        for i in 2..6 {
            for j in 2..6 {
                prop_assert!((v0[(i, j)] - v1[(i, j)]).abs() <= 1e-9 * scale, "({i},{j})");
            }
        }
    }

    /// Symmetric (Lindblad) damping of both quadratures always yields a
    /// physical state; contrast with the momentum-only Brownian form.
    #[test]
    fn symmetric_damping_is_physical(seed in any::<u64>()) {
        let Some((m, lm, _)) = stable_model(seed) else { return Ok(()) };
        let mut a = lm.drift;
        let mut d = Matrix6::from_diagonal(&Vector6::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0));
        for (k, gamma, n) in [(2, m.gamma1, m.n1), (4, m.gamma2, m.n2)] {
            a[(k, k)] = -gamma;
            a[(k + 1, k + 1)] = -gamma;
            d[(k, k)] = gamma * (2.0 * n + 1.0);
            d[(k + 1, k + 1)] = gamma * (2.0 * n + 1.0);
        }
        if !stability(&a, 0.0).unwrap().stable {
            return Ok(());
        }
        let v = solve_lyapunov(&a, &d).unwrap();
        prop_assert!(physicality_floor(&v) >= -1e-9 * v.amax().max(1.0));
        prop_assert!(raw_occupation(&v, Mode::Mirror) >= -1e-9);
        prop_assert!(raw_occupation(&v, Mode::Sphere) >= -1e-9);
    }

    #[test]
    fn drift_linear_coupling_limit(mut m in params()) {
        m.g2 = 0.0;
        let s = classical_fixed_point(&m).unwrap();
        let a = build_drift(&m, &s);
        let (x, _) = s.field_quadratures();
        let (d, g) = (s.delta_eff, m.g1);
        #[rustfmt::skip]
        let expected = Matrix6::from_row_slice(&[
            -1.0, -d,   0.0,       0.0,             0.0,       0.0,
             d,   -1.0, g * x,     0.0,             0.0,       0.0,
             0.0,  0.0, 0.0,       m.omega1,        0.0,       0.0,
             g * x, 0.0, -m.omega1, -2.0 * m.gamma1, 0.0,       0.0,
             0.0,  0.0, 0.0,       0.0,             0.0,       m.omega2,
             0.0,  0.0, 0.0,       0.0,            -m.omega2, -2.0 * m.gamma2,
        ]);
        prop_assert!((a - expected).amax() <= 1e-12 * expected.amax());
    }

    #[test]
    fn drift_quadratic_coupling_limit(mut m in params()) {
        m.g1 = 0.0;
        m.chi = 0.0;
        let Ok(s) = classical_fixed_point(&m) else { return Ok(()) };
        let a = build_drift(&m, &s);
        let (x, _) = s.field_quadratures();
        let d = s.delta_eff;
        // no static sphere displacement, so the quadratic term only stiffens the trap
        #[rustfmt::skip]
        let expected = Matrix6::from_row_slice(&[
            -1.0, -d,   0.0,       0.0,             0.0,                         0.0,
             d,   -1.0, 0.0,       0.0,             0.0,                         0.0,
             0.0,  0.0, 0.0,       m.omega1,        0.0,                         0.0,
             0.0,  0.0, -m.omega1, -2.0 * m.gamma1, 0.0,                         0.0,
             0.0,  0.0, 0.0,       0.0,             0.0,                         m.omega2,
             0.0,  0.0, 0.0,       0.0,            -m.omega2 - m.g2 * x * x,    -2.0 * m.gamma2,
        ]);
        prop_assert!((a - expected).amax() <= 1e-12 * expected.amax());
        prop_assert!((m.omega2 + m.g2 * x * x - s.omega2_eff).abs() <= 1e-12 * m.omega2);
    }
}
