use super::*;
use crate::model::{BrownianDemand, HoldingCostModel, OrderingCostModel, ProblemInstance, SetupCostModel};
use rand::{Rng, SeedableRng};
use std::f64::consts::LN_2;

fn ctx(holding: HoldingCostModel<f64>, setup: SetupCostModel<f64>) -> AnalyticsContext<f64> {
    AnalyticsContext::new(ProblemInstance::new(
        BrownianDemand::new(1.0, 2.0).unwrap(),
        holding,
        OrderingCostModel::new(0.0, setup).unwrap(),
        0.0,
    ))
    .unwrap()
}

fn quad(setup: SetupCostModel<f64>) -> AnalyticsContext<f64> {
    ctx(HoldingCostModel::quadratic(1.0).unwrap(), setup)
}

fn step(q: &[f64], k: &[f64]) -> SetupCostModel<f64> {
    SetupCostModel::step(q.to_vec(), k.to_vec()).unwrap()
}

const TIE: f64 = 1e-9;

#[test]
fn constant_fee_thirty_six() {
    let c = solve_constant(&quad(SetupCostModel::zero()), 36.0).unwrap();
    assert!((c.xi_hat - 6.0).abs() < 1e-7);
    assert!((c.s_hat + 4.0).abs() < 1e-7 && (c.big_s_hat - 2.0).abs() < 1e-7);
    assert!((c.nu_hat - 10.0).abs() < 1e-7);
    let r = c.residuals;
    assert!(r.level_integral <= 1e-8 && r.matched_level <= 1e-8 && r.area <= 1e-8 && r.average_cost <= 1e-8, "{r:?}");
}

#[test]
fn constant_fee_zero_and_six() {
    let b = quad(SetupCostModel::zero());
    let c = solve_constant(&b, 0.0).unwrap();
    assert_eq!((c.xi_hat, c.s_hat, c.big_s_hat), (0.0, -1.0, -1.0));
    assert!((c.nu_hat - 1.0).abs() < 1e-14);
    let c = solve_constant(&b, 6.0).unwrap();
    assert!((c.xi_hat - 36f64.cbrt()).abs() < 1e-8);
    assert!((c.nu_hat - (1.0 + 4.5f64.powf(2.0 / 3.0))).abs() < 1e-8);
    assert!(solve_constant(&b, -1.0).is_err());
}

#[test]
fn constant_solution_is_monotone_in_the_fee() {
    let b = quad(SetupCostModel::zero());
    let sols: Vec<_> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&k| solve_constant(&b, k).unwrap()).collect();
    for w in sols.windows(2) {
        assert!(w[1].xi_hat > w[0].xi_hat);
        assert!(w[1].big_s_hat > w[0].big_s_hat);
        assert!(w[1].nu_hat > w[0].nu_hat);
        assert!(w[1].s_hat < w[0].s_hat);
    }
}

#[test]
fn step_with_rising_fee() {
    let r = solve_step(&quad(step(&[4.0], &[6.0, 48.0])), TIE).unwrap();
    let xi = 36f64.cbrt();
    assert_eq!(r.method, Method::StepAlgorithm);
    assert!((r.nu_star - (1.0 + 4.5f64.powf(2.0 / 3.0))).abs() < 1e-8);
    assert!((r.s_star - (-1.0 - xi / 2.0)).abs() < 1e-8);
    assert!((r.big_s_star - (-1.0 + xi / 2.0)).abs() < 1e-8);
    let t = r.candidate_table.unwrap();
    assert!(t.rows.iter().all(|row| row.membership == Membership::Inside && row.candidate));
    assert!((t.rows[1].nu.unwrap() - (1.0 + 36f64.powf(2.0 / 3.0))).abs() < 1e-7);
    assert_eq!(t.n_star, 1);
}

#[test]
fn step_with_volume_discount() {
    let r = solve_step(&quad(step(&[4.0], &[6.0, 0.6])), TIE).unwrap();
    assert!((r.s_star + 3.0).abs() < 1e-9 && (r.big_s_star - 1.0).abs() < 1e-9);
    assert!((r.nu_star - (0.15 + 28.0 / 12.0)).abs() < 1e-9);
    let t = r.candidate_table.unwrap();
    assert_eq!(t.n_star, 2);
    assert_eq!(t.rows[1].membership, Membership::Below);
    assert_eq!(t.rows[1].xi_star, 4.0);
    assert!((t.rows[1].constant.xi_hat - 1.5326).abs() < 1e-4);
}

#[test]
fn step_with_free_small_orders_is_base_stock() {
    let r = solve_step(&quad(step(&[4.0], &[0.0, 7.0])), TIE).unwrap();
    assert_eq!(r.method, Method::BaseStock);
    assert_eq!((r.s_star, r.big_s_star), (-1.0, -1.0));
    assert!((r.nu_star - 1.0).abs() < 1e-14);
}

#[test]
fn grid_matches_exact_solvers() {
    let cfg = GridConfig::default();
    let b = quad(SetupCostModel::constant(36.0).unwrap());
    let g = solve_grid(&b, &cfg, TIE).unwrap();
    assert!((g.nu_star - 10.0).abs() < 1e-6);
    let b = quad(step(&[4.0], &[6.0, 48.0]));
    let g = solve_grid(&b, &cfg, TIE).unwrap();
    let s = solve_step(&b, TIE).unwrap();
    assert!((g.nu_star - s.nu_star).abs() < 1e-6);
    let g = solve_grid(&quad(SetupCostModel::zero()), &cfg, TIE).unwrap();
    assert_eq!((g.s_star, g.big_s_star), (-1.0, -1.0));
    assert!((g.nu_star - 1.0).abs() < 1e-12);
}

#[test]
fn base_stock_for_absolute_cost() {
    let a = ctx(HoldingCostModel::piecewise_linear(1.0, 1.0).unwrap(), SetupCostModel::zero());
    let r = solve(&a, &SolveOptions::default()).unwrap();
    assert_eq!(r.method, Method::BaseStock);
    assert!((r.s_star + LN_2).abs() < 1e-10 && (r.big_s_star + LN_2).abs() < 1e-10);
    assert!((r.nu_star - LN_2).abs() < 1e-10);
    assert_eq!(r.certified(), Some(true));
}

#[test]
fn dispatch_and_certificate() {
    let r = solve(&quad(SetupCostModel::constant(36.0).unwrap()), &SolveOptions::default()).unwrap();
    assert_eq!(r.method, Method::ConstantK);
    assert!((r.nu_star - 10.0).abs() < 1e-7);
    assert_eq!(r.certified(), Some(true));
    let opts = SolveOptions { cross_check: true, ..SolveOptions::default() };
    let r = solve(&quad(step(&[4.0], &[6.0, 48.0])), &opts).unwrap();
    assert_eq!(r.method, Method::StepAlgorithm);
    assert!(r.grid_check.unwrap().gap.abs() < 1e-6);
    assert_eq!(r.certified(), Some(true), "{:?}", r.certificate.unwrap().violations);
}

#[test]
fn result_serialises_with_star_keys() {
    let r = solve(&quad(SetupCostModel::constant(36.0).unwrap()), &SolveOptions { certificate: None, ..Default::default() })
        .unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert!(v.get("s_star").is_some() && v.get("S_star").is_some() && v.get("nu_star").is_some());
    assert_eq!(v["method"], "constant_k");
}

fn random_step(rng: &mut impl Rng) -> SetupCostModel<f64> {
    loop {
        let mut q = 0.0;
        let bps: Vec<f64> = (0..4).map(|_| {
            q += rng.random_range(0.3..4.0);
            q
        }).collect();
        let fees: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..40.0)).collect();
        if let Ok(s) = SetupCostModel::step(bps, fees) {
            return s;
        }
    }
}

#[test]
fn step_algorithm_agrees_with_grid_on_random_instances() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let cfg = GridConfig { log_points: 128, uniform_points: 128, ..GridConfig::default() };
    for i in 0..8 {
        let holding = if i % 2 == 0 {
            HoldingCostModel::quadratic(1.0).unwrap()
        } else {
            HoldingCostModel::piecewise_linear(1.0, 1.0).unwrap()
        };
        let c = ctx(holding, random_step(&mut rng));
        let s = solve_step(&c, TIE).unwrap();
        let g = solve_grid(&c, &cfg, TIE).unwrap();
        assert!((s.nu_star - g.nu_star).abs() <= 1e-5 * (1.0 + s.nu_star), "case {i}: {} vs {}", s.nu_star, g.nu_star);
        assert!(s.s_star < c.z_star() && c.z_star() < s.big_s_star);
        for row in &s.candidate_table.as_ref().unwrap().rows {
            if !row.candidate {
                let by = row.dominated_by.unwrap();
                let winner = &s.candidate_table.as_ref().unwrap().rows[by - 1];
                assert!(winner.nu.unwrap() < row.nu_tilde);
            }
        }
    }
}

#[test]
fn single_precision_solve() {
    let inst: ProblemInstance<f32> = ProblemInstance::new(
        BrownianDemand::new(1.0, 2.0).unwrap(),
        HoldingCostModel::quadratic(1.0).unwrap(),
        OrderingCostModel::new(0.0, SetupCostModel::constant(36.0).unwrap()).unwrap(),
        0.0,
    );
    let c = AnalyticsContext::new(inst).unwrap();
    let r = solve(&c, &SolveOptions { certificate: None, ..Default::default() }).unwrap();
    assert!((r.nu_star - 10.0).abs() < 1e-3);
}
