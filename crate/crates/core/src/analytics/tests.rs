use super::*;
use crate::model::{BrownianDemand, HoldingCostModel, OrderingCostModel, SetupCostModel};
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn instance(holding: HoldingCostModel<f64>, setup: SetupCostModel<f64>) -> ProblemInstance<f64> {
    ProblemInstance::new(
        BrownianDemand::new(1.0, 2.0).unwrap(),
        holding,
        OrderingCostModel::new(0.0, setup).unwrap(),
        0.0,
    )
}

/// μ = 1, σ² = 2, h = |z|.
fn ctx_a(kappa: f64) -> AnalyticsContext<f64> {
    AnalyticsContext::new(instance(
        HoldingCostModel::piecewise_linear(1.0, 1.0).unwrap(),
        SetupCostModel::constant(kappa).unwrap(),
    ))
    .unwrap()
}

/// μ = 1, σ² = 2, h = z².
fn ctx_b(kappa: f64) -> AnalyticsContext<f64> {
    AnalyticsContext::new(instance(HoldingCostModel::quadratic(1.0).unwrap(), SetupCostModel::constant(kappa).unwrap()))
        .unwrap()
}

fn g0_a(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 + z
    } else {
        2.0 * z.exp() - 1.0 - z
    }
}

fn g0_b(z: f64) -> f64 {
    z * z + 2.0 * z + 2.0
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn g0_matches_hand_integrals() {
    let a = ctx_a(0.0);
    assert!(close(a.g0(0.0).unwrap(), 1.0, 1e-14));
    assert!(close(a.g0(-LN_2).unwrap(), LN_2, 1e-14));
    assert!(close(ctx_b(0.0).g0(-4.0).unwrap(), 10.0, 1e-12));
}

#[test]
fn g0_prime_values_and_kink() {
    let a = ctx_a(0.0);
    assert!(close(ctx_b(0.0).g0_prime(-1.0).unwrap(), 0.0, 1e-14));
    assert!(close(a.g0_prime(1.0).unwrap(), 1.0, 1e-14));
    assert!(close(a.g0_prime(-3.0).unwrap(), 2.0 * (-3f64).exp() - 1.0, 1e-14));
    assert!(matches!(a.g0_prime(0.0), Err(AnalyticsError::AtKink { .. })));
    assert!(ctx_b(0.0).g0_prime(0.0).is_ok());
}

#[test]
fn z_star_is_exact() {
    let a = ctx_a(0.0);
    let b = ctx_b(0.0);
    assert!(close(a.z_star(), -LN_2, 1e-12));
    assert!(close(b.z_star(), -1.0, 1e-12));
    for ctx in [&a, &b] {
        let z = ctx.z_star();
        assert!(close(ctx.g0(z).unwrap(), ctx.instance().holding.eval(z) / ctx.instance().mu(), 1e-12));
        assert!(ctx.g0_prime(z).unwrap().abs() <= 1e-10);
    }
}

#[test]
fn z_star_in_single_precision() {
    let inst: ProblemInstance<f32> = ProblemInstance::new(
        BrownianDemand::new(1.0, 2.0).unwrap(),
        HoldingCostModel::quadratic(1.0).unwrap(),
        OrderingCostModel::new(0.0, SetupCostModel::constant(36.0).unwrap()).unwrap(),
        0.0,
    );
    let ctx = AnalyticsContext::new(inst).unwrap();
    assert!((ctx.z_star() + 1.0).abs() < 1e-5);
    let m = ctx.matched_levels(6.0).unwrap();
    assert!((m.s_tilde + 4.0).abs() < 1e-4);
}

#[test]
fn matched_levels_follow_symmetry() {
    let b = ctx_b(0.0);
    let m = b.matched_levels(6.0).unwrap();
    assert!(close(m.s_tilde, -4.0, 1e-12) && close(m.big_s_tilde, 2.0, 1e-12));
    let m = b.matched_levels(4.0).unwrap();
    assert!(close(m.s_tilde, -3.0, 1e-12) && close(m.big_s_tilde, 1.0, 1e-12));
    let m = b.matched_levels(0.0).unwrap();
    assert_eq!((m.s_tilde, m.big_s_tilde), (b.z_star(), b.z_star()));
    assert!(b.matched_levels(-1.0).is_err());
}

#[test]
fn gamma_examples() {
    assert!(close(ctx_b(0.0).gamma(-1.0, -1.0).unwrap().finite().unwrap(), 1.0, 1e-12));
    assert!(close(ctx_b(36.0).gamma(-4.0, 2.0).unwrap().finite().unwrap(), 10.0, 1e-9));
    assert!(close(ctx_a(1.0).gamma(0.0, 1.0).unwrap().finite().unwrap(), 2.5, 1e-9));
    assert!(ctx_b(36.0).gamma(-1.0, -1.0).unwrap().is_infinite());
    assert!(matches!(ctx_b(0.0).gamma(1.0, 0.0), Err(AnalyticsError::InvertedLevels { .. })));
}

#[test]
fn theta_examples() {
    assert!(close(ctx_b(36.0).theta(6.0).unwrap().finite().unwrap(), 10.0, 1e-9));
    assert!(ctx_b(36.0).theta(0.0).unwrap().is_infinite());
    assert!(close(ctx_b(0.0).theta(0.0).unwrap().finite().unwrap(), 1.0, 1e-12));
}

#[test]
fn level_set_width() {
    let b = ctx_b(0.0);
    assert!(close(b.lambda_measure(10.0).unwrap(), 6.0, 1e-12));
    assert_eq!(b.lambda_measure(b.g0_min().unwrap()).unwrap(), 0.0);
    assert!(b.lambda_measure(0.5).is_err());

    // left end solves 2e^s = 2 + s, found here by Newton; right end is 0
    let mut s = -1.5_f64;
    for _ in 0..50 {
        s -= (2.0 * s.exp() - 2.0 - s) / (2.0 * s.exp() - 1.0);
    }
    let a = ctx_a(0.0);
    assert!(close(a.lambda_measure(1.0).unwrap(), -s, 1e-12));
    assert!(close(-s, 1.59362, 1e-5));
}

#[test]
fn big_i_closed_form() {
    let b = ctx_b(0.0);
    assert!(close(b.big_i(10.0).unwrap(), 36.0, 1e-8));
    assert_eq!(b.big_i(1.0).unwrap(), 0.0);
    let u = 3.7257;
    assert!(close(b.big_i(u).unwrap(), 4.0 / 3.0 * (u - 1.0_f64).powf(1.5), 1e-8));
    assert!(close(b.big_i(u).unwrap(), 6.0, 1e-3));
}

#[test]
fn big_l_closed_form() {
    let b = ctx_b(0.0);
    assert!(close(b.big_l(6.0).unwrap(), 36.0, 1e-8));
    assert!(close(b.big_l(2.0).unwrap(), 4.0 / 3.0, 1e-10));
    assert_eq!(b.big_l(0.0).unwrap(), 0.0);
}

#[test]
fn big_i_and_big_l_agree_on_random_sizes() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for ctx in [ctx_a(0.0), ctx_b(0.0)] {
        for _ in 0..100 {
            let xi: f64 = rng.random_range(0.01..8.0);
            let m = ctx.matched_levels(xi).unwrap();
            let i = ctx.big_i(ctx.g0(m.s_tilde).unwrap()).unwrap();
            let l = ctx.big_l(xi).unwrap();
            assert!(close(i, l, 1e-7), "xi = {xi}: I = {i}, L = {l}");
        }
    }
}

#[test]
fn relative_value_boundary_condition() {
    let b = ctx_b(36.0);
    assert_eq!(b.relative_value(-4.0, -4.0, 10.0).unwrap(), 0.0);
    assert!(close(b.relative_value(2.0, -4.0, 10.0).unwrap(), -36.0, 1e-9));
}

#[test]
fn relative_value_solves_the_ode() {
    for ctx in [ctx_a(1.0), ctx_b(36.0)] {
        let v = ValueFunction::new(&ctx, -3.0, 4.0);
        let step = 1e-3;
        for i in 0..40 {
            let z = -5.0 + 0.25 * i as f64 + 0.0371;
            let (m, c, p) = (v.value(z - step).unwrap(), v.value(z).unwrap(), v.value(z + step).unwrap());
            let d2 = (p - 2.0 * c + m) / (step * step);
            let d1 = (p - m) / (2.0 * step);
            let resid = d2 - d1 + ctx.instance().holding.eval(z) - 4.0;
            assert!(resid.abs() < 1e-4, "z = {z}: residual {resid}");
            assert!(v.generator_residual(z).unwrap().unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn derivative_sign_pattern_and_growth() {
    for ctx in [ctx_a(0.0), ctx_b(0.0)] {
        let z = ctx.z_star();
        for i in 1..=100 {
            let d = 10.0 * i as f64 / 100.0;
            assert!(ctx.g0_prime_unchecked(z - d).unwrap() < 0.0);
            assert!(ctx.g0_prime_unchecked(z + d).unwrap() > 0.0);
        }
        for sign in [-1.0, 1.0] {
            assert!(ctx.g0(10.0 * sign).unwrap() > ctx.g0(5.0 * sign).unwrap());
        }
    }
}

#[test]
fn matched_levels_are_monotone() {
    for ctx in [ctx_a(0.0), ctx_b(0.0)] {
        let mut prev = ctx.matched_levels(0.0).unwrap();
        for i in 1..=60 {
            let m = ctx.matched_levels(0.1 * i as f64).unwrap();
            assert!(m.s_tilde < prev.s_tilde && m.big_s_tilde > prev.big_s_tilde);
            assert!(m.s_tilde < ctx.z_star() && ctx.z_star() < m.big_s_tilde);
            let (gs, gb) = (ctx.g0(m.s_tilde).unwrap(), ctx.g0(m.big_s_tilde).unwrap());
            assert!((gs - gb).abs() <= 1e-10 * (1.0 + gs.abs()));
            prev = m;
        }
    }
}

#[test]
fn quadrature_agrees_with_closed_forms() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let quad = QuadratureConfig { scheme: QuadratureScheme::Simpson, ..QuadratureConfig::default() };
    let holdings = [
        HoldingCostModel::piecewise_linear(1.0, 3.0).unwrap(),
        HoldingCostModel::quadratic(0.5).unwrap(),
    ];
    for h in holdings {
        let inst = instance(h, SetupCostModel::zero());
        let fast = AnalyticsContext::new(inst.clone()).unwrap();
        let slow = AnalyticsContext::with_config(inst, quad, RootConfig::default()).unwrap();
        for _ in 0..1000 {
            let z: f64 = rng.random_range(-20.0..20.0);
            let (a, b) = (fast.g0(z).unwrap(), slow.g0(z).unwrap());
            assert!((a - b).abs() <= 1e-9 * a.abs(), "z = {z}: {a} vs {b}");
        }
        assert!((fast.z_star() - slow.z_star()).abs() < 1e-9);
    }
}

#[test]
fn convex_polynomial_matches_quadratic() {
    let poly = instance(HoldingCostModel::convex_poly(vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]).unwrap(), SetupCostModel::zero());
    let ctx = AnalyticsContext::new(poly).unwrap();
    for z in [-6.0, -1.0, 0.0, 0.5, 3.0] {
        assert!(close(ctx.g0(z).unwrap(), g0_b(z), 1e-9 * g0_b(z)));
    }
    assert!(close(ctx.z_star(), -1.0, 1e-8));
    // asymmetric polynomial: compare with direct large-truncation Simpson
    let asym = instance(
        HoldingCostModel::convex_poly(vec![0.0, 1.0, 0.0, 0.5], vec![0.0, 2.0, 1.0]).unwrap(),
        SetupCostModel::zero(),
    );
    let ctx = AnalyticsContext::new(asym).unwrap();
    let h = |x: f64| if x >= 0.0 { x + 0.5 * x.powi(3) } else { -2.0 * x + x * x };
    let z = -0.7;
    let direct: f64 = crate::numerics::adaptive_simpson(
        |y: f64| Ok::<_, QuadratureError>(h(y + z) * (-y).exp()),
        0.0,
        80.0,
        1e-13,
        60,
    )
    .unwrap();
    assert!(close(ctx.g0(z).unwrap(), direct, 1e-8));
    assert!(ctx.z_star() < 0.0);
}

#[test]
fn hand_oracles_hold_on_a_grid() {
    let (a, b) = (ctx_a(0.0), ctx_b(0.0));
    for i in 0..=200 {
        let z = -10.0 + 0.1 * i as f64;
        assert!(close(a.g0(z).unwrap(), g0_a(z), 1e-12 * (1.0 + g0_a(z))));
        assert!(close(b.g0(z).unwrap(), g0_b(z), 1e-12 * (1.0 + g0_b(z))));
    }
}

#[test]
fn theta_has_a_single_valley_for_constant_fee() {
    for (ctx, kappa) in [(ctx_b(36.0), 36.0), (ctx_a(1.0), 1.0)] {
        let xi_hat = {
            let mut lo = 0.0;
            let mut hi = 1.0;
            while ctx.big_l(hi).unwrap() < kappa {
                hi *= 2.0;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if ctx.big_l(mid).unwrap() < kappa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let grid: Vec<f64> = (1..=200).map(|i| xi_hat * 3.0 * i as f64 / 200.0).collect();
        let th: Vec<f64> = grid.iter().map(|&x| ctx.theta(x).unwrap().finite().unwrap()).collect();
        for (w, xs) in th.windows(2).zip(grid.windows(2)) {
            let slope = w[1] - w[0];
            if xs[1] < xi_hat {
                assert!(slope < 0.0);
            } else if xs[0] > xi_hat {
                assert!(slope > 0.0);
            }
        }
    }
}

#[test]
fn certificate_accepts_the_optimum_and_rejects_a_raised_cost() {
    let b = ctx_b(36.0);
    let cfg = CertificateConfig { grid_points: 1024, ..CertificateConfig::default() };
    let ok = b.vstar_certificate(-4.0, 2.0, 10.0, &cfg).unwrap();
    assert!(ok.passed, "{:?}", ok.violations);
    assert!(ok.floor < b.z_star());
    let bad = b.vstar_certificate(-4.0, 2.0, 10.5, &cfg).unwrap();
    assert!(!bad.passed);
    assert!(bad.failed(CertificateCheck::OrderCost));
    assert!(bad.failed(CertificateCheck::Attainment));
}

#[test]
fn certificate_for_base_stock_without_fee() {
    let b = ctx_b(0.0);
    let cfg = CertificateConfig { grid_points: 512, ..CertificateConfig::default() };
    let rep = b.vstar_certificate(-1.0, -1.0, 1.0, &cfg).unwrap();
    assert!(rep.passed, "{:?}", rep.violations);
}

#[test]
fn config_bounds_are_enforced() {
    let inst = instance(HoldingCostModel::quadratic(1.0).unwrap(), SetupCostModel::zero());
    let quad = QuadratureConfig { tol: 1e-3, ..QuadratureConfig::default() };
    assert!(matches!(
        AnalyticsContext::with_config(inst, quad, RootConfig::default()),
        Err(AnalyticsError::Config(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_at_matched_levels_beats_shifted_windows(xi in 0.1f64..10.0, shift in -2.0f64..2.0) {
        let b = ctx_b(5.0);
        let m = b.matched_levels(xi).unwrap();
        let best = b.gamma(m.s_tilde, m.big_s_tilde).unwrap().finite().unwrap();
        let other = b.gamma(m.s_tilde + shift, m.big_s_tilde + shift).unwrap().finite().unwrap();
        prop_assert!(best <= other + 1e-10);
    }

    #[test]
    fn gamma_is_finite_above_base_stock(s in -10.0f64..5.0, w in 0.01f64..10.0) {
        let a = ctx_a(2.0);
        let g = a.gamma(s, s + w).unwrap();
        prop_assert!(g.finite().is_some_and(|v| v > 0.0));
    }
}
