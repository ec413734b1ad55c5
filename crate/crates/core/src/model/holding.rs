use serde::Serialize;

use super::{Condition, ValidationError, Violation};
use crate::scalar::Scalar;

/// Shape of the holding/shortage cost rate `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HoldingKind<T> {
    /// `β₁z` for `z ≥ 0`, `−β₂z` for `z < 0`.
    PiecewiseLinear { beta1: T, beta2: T },
    /// `βz²`.
    Quadratic { beta: T },
    /// `Σ positive[j]·z^j` for `z ≥ 0` and `Σ negative[j]·(−z)^j` for `z < 0`;
    /// index `j` is the power, so entry 0 is the constant term.
    ConvexPoly { positive: Vec<T>, negative: Vec<T> },
}

/// Polynomial growth witness: `h(z) ≤ b0 + b1·|z|^degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyBound<T> {
    pub degree: u32,
    pub b0: T,
    pub b1: T,
}

/// Uniform grid used for the sampled (non-analytic) checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SampleGrid {
    /// Grid used to sample convexity, monotonicity and growth of user polynomials.
    pub const DEFAULT: SampleGrid = SampleGrid { lo: -100.0, hi: 100.0, points: 2001 };

    pub fn nodes<T: Scalar>(&self) -> impl Iterator<Item = T> + '_ {
        let n = self.points.max(2);
        (0..n).map(move |i| T::lit(self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldingCostModel<T> {
    #[serde(flatten)]
    kind: HoldingKind<T>,
    bound: PolyBound<T>,
    /// Present when convexity/monotonicity were sampled rather than proven.
    sampled_on: Option<SampleGrid>,
}

impl<T: Scalar> HoldingCostModel<T> {
    pub fn piecewise_linear(beta1: T, beta2: T) -> Result<Self, ValidationError> {
        Self::new(HoldingKind::PiecewiseLinear { beta1, beta2 }, None)
    }

    pub fn quadratic(beta: T) -> Result<Self, ValidationError> {
        Self::new(HoldingKind::Quadratic { beta }, None)
    }

    pub fn convex_poly(positive: Vec<T>, negative: Vec<T>) -> Result<Self, ValidationError> {
        Self::new(HoldingKind::ConvexPoly { positive, negative }, None)
    }

    /// Validates `kind` against (H1)–(H5). A missing growth witness is derived
    /// from the coefficients; a supplied one is checked on [`SampleGrid::DEFAULT`].
    pub fn new(kind: HoldingKind<T>, bound: Option<PolyBound<T>>) -> Result<Self, ValidationError> {
        let mut violations = Vec::new();
        let mut sampled_on = None;
        let positive_param = |name: &str, v: T, out: &mut Vec<Violation>| {
            if !v.is_finite() {
                out.push(Violation::new(Condition::H5, Some(v.to_f64_lossy()), format!("{name} must be finite")));
            } else if v <= T::zero() {
                out.push(Violation::new(
                    Condition::H4,
                    Some(v.to_f64_lossy()),
                    format!("{name} must be positive so that h decreases below zero and increases above it"),
                ));
            }
        };
        match &kind {
            HoldingKind::PiecewiseLinear { beta1, beta2 } => {
                positive_param("beta1", *beta1, &mut violations);
                positive_param("beta2", *beta2, &mut violations);
            }
            HoldingKind::Quadratic { beta } => positive_param("beta", *beta, &mut violations),
            HoldingKind::ConvexPoly { positive, negative } => {
                sampled_on = Some(SampleGrid::DEFAULT);
                check_poly(positive, negative, &mut violations);
            }
        }
        if !violations.is_empty() {
            return Err(ValidationError { violations, grid: sampled_on });
        }

        let derived = derive_bound(&kind);
        let bound = bound.unwrap_or(derived);
        let model = Self { kind, bound, sampled_on };
        model.check_bound(&mut violations);
        if !violations.is_empty() {
            return Err(ValidationError { violations, grid: Some(SampleGrid::DEFAULT) });
        }
        Ok(model)
    }

    fn check_bound(&self, out: &mut Vec<Violation>) {
        let b = self.bound;
        if b.degree == 0 || !(b.b0 > T::zero()) || !(b.b1 > T::zero()) || !b.b0.is_finite() || !b.b1.is_finite() {
            out.push(Violation::new(
                Condition::H5,
                None,
                "growth witness needs a positive integer degree and positive finite b0, b1",
            ));
            return;
        }
        for z in SampleGrid::DEFAULT.nodes::<T>() {
            let h = self.eval(z);
            let cap = b.b0 + b.b1 * z.abs().powi(b.degree as i32);
            if h > cap * (T::one() + T::lit(1e-12)) {
                out.push(Violation::new(
                    Condition::H5,
                    Some(z.to_f64_lossy()),
                    format!("h(z) = {h} exceeds b0 + b1|z|^a = {cap}"),
                ));
                return;
            }
        }
    }

    pub fn kind(&self) -> &HoldingKind<T> {
        &self.kind
    }

    pub fn bound(&self) -> PolyBound<T> {
        self.bound
    }

    pub fn sampled_on(&self) -> Option<SampleGrid> {
        self.sampled_on
    }

    /// `h(z)`.
    pub fn eval(&self, z: T) -> T {
        match &self.kind {
            HoldingKind::PiecewiseLinear { beta1, beta2 } => {
                if z >= T::zero() {
                    *beta1 * z
                } else {
                    -*beta2 * z
                }
            }
            HoldingKind::Quadratic { beta } => *beta * z * z,
            HoldingKind::ConvexPoly { positive, negative } => {
                if z >= T::zero() {
                    horner(positive, z)
                } else {
                    horner(negative, -z)
                }
            }
        }
    }

    /// `h'(z)`; at a kink the right derivative is returned.
    pub fn derivative(&self, z: T) -> T {
        match &self.kind {
            HoldingKind::PiecewiseLinear { beta1, beta2 } => {
                if z >= T::zero() {
                    *beta1
                } else {
                    -*beta2
                }
            }
            HoldingKind::Quadratic { beta } => T::lit(2.0) * *beta * z,
            HoldingKind::ConvexPoly { positive, negative } => {
                if z >= T::zero() {
                    horner_derivative(positive, z)
                } else {
                    -horner_derivative(negative, -z)
                }
            }
        }
    }

    /// Whether `h` fails to be differentiable at zero.
    pub fn kinked_at_zero(&self) -> bool {
        match &self.kind {
            HoldingKind::PiecewiseLinear { .. } => true,
            HoldingKind::Quadratic { .. } => false,
            HoldingKind::ConvexPoly { positive, negative } => {
                let right = positive.get(1).copied().unwrap_or_else(T::zero);
                let left = -negative.get(1).copied().unwrap_or_else(T::zero);
                right != left
            }
        }
    }

    /// Closed form of `E[h(z + E)]` with `E ~ Exp(λ)`, i.e.
    /// `λ∫₀^∞ h(z+y)e^{−λy}dy`, when one is implemented for this kind.
    pub fn exp_shift_mean(&self, z: T, lambda: T) -> Option<T> {
        match &self.kind {
            HoldingKind::PiecewiseLinear { beta1, beta2 } => {
                let inv = lambda.recip();
                Some(if z >= T::zero() {
                    *beta1 * (z + inv)
                } else {
                    (*beta1 + *beta2) * (lambda * z).exp() * inv - *beta2 * (z + inv)
                })
            }
            HoldingKind::Quadratic { beta } => {
                let inv = lambda.recip();
                Some(*beta * (z * z + T::lit(2.0) * z * inv + T::lit(2.0) * inv * inv))
            }
            HoldingKind::ConvexPoly { .. } => None,
        }
    }
}

fn horner<T: Scalar>(coefficients: &[T], x: T) -> T {
    coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

fn horner_derivative<T: Scalar>(coefficients: &[T], x: T) -> T {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(T::zero(), |acc, (j, &c)| acc * x + c * T::lit(j as f64))
}

fn derive_bound<T: Scalar>(kind: &HoldingKind<T>) -> PolyBound<T> {
    match kind {
        HoldingKind::PiecewiseLinear { beta1, beta2 } => {
            PolyBound { degree: 1, b0: T::one(), b1: beta1.max(*beta2) }
        }
        HoldingKind::Quadratic { beta } => PolyBound { degree: 2, b0: T::one(), b1: *beta },
        HoldingKind::ConvexPoly { positive, negative } => {
            let degree = positive.len().max(negative.len()).saturating_sub(1).max(1) as u32;
            // |z|^j ≤ 1 + |z|^a for j ≤ a
            let total: T = positive.iter().chain(negative.iter()).map(|c| c.abs()).sum();
            PolyBound { degree, b0: T::one() + total, b1: total.max(T::epsilon()) }
        }
    }
}

fn check_poly<T: Scalar>(positive: &[T], negative: &[T], out: &mut Vec<Violation>) {
    if positive.len() < 2 || negative.len() < 2 {
        out.push(Violation::new(
            Condition::Structure,
            None,
            "each side of a convex polynomial needs at least a constant and a linear coefficient",
        ));
        return;
    }
    if positive.iter().chain(negative.iter()).any(|c| !c.is_finite()) {
        out.push(Violation::new(Condition::H5, None, "polynomial coefficients must be finite"));
        return;
    }
    for (side, coefs) in [("positive", positive), ("negative", negative)] {
        if coefs[0] != T::zero() {
            out.push(Violation::new(
                Condition::H1,
                Some(coefs[0].to_f64_lossy()),
                format!("{side}-side constant term must be zero so that h(0) = 0"),
            ));
        }
    }
    let h = |z: T| if z >= T::zero() { horner(positive, z) } else { horner(negative, -z) };
    let dh = |z: T| {
        if z >= T::zero() {
            horner_derivative(positive, z)
        } else {
            -horner_derivative(negative, -z)
        }
    };
    let nodes: Vec<T> = SampleGrid::DEFAULT.nodes().collect();
    'convex: for stride in [1usize, 10, 100] {
        for i in stride..nodes.len().saturating_sub(stride) {
            let (x, m, y) = (nodes[i - stride], nodes[i], nodes[i + stride]);
            let chord = (h(x) + h(y)) * T::lit(0.5);
            let slack = T::lit(1e-12) * (h(x).abs() + h(y).abs()) + T::lit(1e-300).max(T::min_positive_value());
            if h(m) > chord + slack {
                out.push(Violation::new(
                    Condition::H2,
                    Some(m.to_f64_lossy()),
                    format!("midpoint convexity fails between {x} and {y}"),
                ));
                break 'convex;
            }
        }
    }
    for &z in &nodes {
        if z == T::zero() {
            continue;
        }
        let d = dh(z);
        let ok = if z > T::zero() { d > T::zero() } else { d < T::zero() };
        if !ok {
            out.push(Violation::new(
                Condition::H4,
                Some(z.to_f64_lossy()),
                format!("h'(z) = {d} has the wrong sign"),
            ));
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_identity_case() {
        let h = HoldingCostModel::quadratic(1.0_f64).unwrap();
        assert_eq!(h.eval(0.0), 0.0);
        assert_eq!(h.eval(-3.0), 9.0);
        assert!(!h.kinked_at_zero());
    }

    #[test]
    fn nonpositive_slope_is_h4() {
        let e = HoldingCostModel::piecewise_linear(1.0_f64, 0.0).unwrap_err();
        assert!(e.has(Condition::H4));
    }

    #[test]
    fn poly_constant_term_is_h1() {
        let e = HoldingCostModel::convex_poly(vec![1.0_f64, 1.0], vec![0.0, 1.0]).unwrap_err();
        assert!(e.has(Condition::H1));
    }

    #[test]
    fn nonconvex_poly_is_h2() {
        // z − z²/400 + z³/1e6 is increasing on [0,100] but concave near 0..~133
        let e = HoldingCostModel::convex_poly(vec![0.0_f64, 1.0, -1.0 / 400.0, 1e-6], vec![0.0, 1.0])
            .unwrap_err();
        assert!(e.has(Condition::H2), "{e}");
    }

    #[test]
    fn poly_decreasing_on_right_is_h4() {
        let e = HoldingCostModel::convex_poly(vec![0.0_f64, -1.0, 1.0], vec![0.0, 1.0]).unwrap_err();
        assert!(e.has(Condition::H4));
    }

    #[test]
    fn too_small_witness_is_h5() {
        let e = HoldingCostModel::new(
            HoldingKind::Quadratic { beta: 2.0_f64 },
            Some(PolyBound { degree: 2, b0: 1.0, b1: 1.0 }),
        )
        .unwrap_err();
        assert!(e.has(Condition::H5));
        assert!(e.grid.is_some());
    }

    #[test]
    fn convex_poly_records_its_grid_and_bound() {
        let h = HoldingCostModel::convex_poly(vec![0.0_f64, 1.0, 0.5], vec![0.0, 3.0]).unwrap();
        assert_eq!(h.sampled_on(), Some(SampleGrid::DEFAULT));
        assert_eq!(h.bound().degree, 2);
        assert_eq!(h.eval(2.0), 4.0);
        assert_eq!(h.eval(-2.0), 6.0);
        assert_eq!(h.derivative(2.0), 3.0);
        assert_eq!(h.derivative(-2.0), -3.0);
        assert!(h.kinked_at_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn built_in_kinds_match_closed_forms(
            z in -50.0f64..50.0,
            b1 in 0.1f64..10.0,
            b2 in 0.1f64..10.0,
        ) {
            let pl = HoldingCostModel::piecewise_linear(b1, b2).unwrap();
            let expected = if z >= 0.0 { b1 * z } else { -b2 * z };
            prop_assert_eq!(pl.eval(z), expected);
            let q = HoldingCostModel::quadratic(b1).unwrap();
            prop_assert_eq!(q.eval(z), b1 * z * z);
        }
    }
}
