use serde::Serialize;

use super::{Condition, ModelError, ValidationError, Violation};
use crate::scalar::{Extended, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetupKind<T> {
    /// `K(ξ) = κ` for every `ξ > 0`.
    Constant { kappa: T },
    /// `K(ξ) = K_n` on `(Q_{n−1}, Q_n)` with `Q_0 = 0`, `Q_N = ∞`, and the
    /// lower neighbouring fee at each breakpoint.
    Step { breakpoints: Vec<T>, values: Vec<T> },
}

/// Quantity-dependent setup cost `K`, with `K(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetupCostModel<T> {
    #[serde(flatten)]
    kind: SetupKind<T>,
    sup: T,
    ell: Extended<T>,
}

impl<T: Scalar> SetupCostModel<T> {
    pub fn constant(kappa: T) -> Result<Self, ValidationError> {
        let mut v = Vec::new();
        check_fee("kappa", kappa, &mut v);
        if !v.is_empty() {
            return Err(ValidationError { violations: v, grid: None });
        }
        let ell = if kappa > T::zero() { Extended::Infinite } else { Extended::Finite(T::zero()) };
        Ok(Self { kind: SetupKind::Constant { kappa }, sup: kappa, ell })
    }

    pub fn zero() -> Self {
        Self::constant(T::zero()).expect("zero setup cost is valid")
    }

    /// Step function with `breakpoints = [Q_1, …, Q_{N−1}]` and
    /// `values = [K_1, …, K_N]`.
    pub fn step(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self, ValidationError> {
        let mut v = Vec::new();
        if values.len() != breakpoints.len() + 1 {
            v.push(Violation::new(
                Condition::Structure,
                Some(values.len() as f64),
                format!(
                    "a step setup cost with {} breakpoints needs {} values",
                    breakpoints.len(),
                    breakpoints.len() + 1
                ),
            ));
        }
        for (i, &q) in breakpoints.iter().enumerate() {
            if !(q > T::zero() && q.is_finite()) {
                v.push(Violation::new(
                    Condition::Structure,
                    Some(q.to_f64_lossy()),
                    format!("breakpoint Q_{} must be positive and finite", i + 1),
                ));
            }
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                v.push(Violation::new(
                    Condition::Structure,
                    Some(w[1].to_f64_lossy()),
                    format!("breakpoints must be strictly increasing (Q_{} ≥ Q_{})", i + 1, i + 2),
                ));
            }
        }
        for (i, &k) in values.iter().enumerate() {
            check_fee(&format!("K_{}", i + 1), k, &mut v);
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[0] == w[1] {
                v.push(Violation::new(
                    Condition::Structure,
                    Some(w[0].to_f64_lossy()),
                    format!("adjacent fees K_{} and K_{} must differ; merge the pieces", i + 1, i + 2),
                ));
            }
        }
        if !v.is_empty() {
            return Err(ValidationError { violations: v, grid: None });
        }
        let sup = values.iter().copied().fold(T::zero(), T::max);
        let ell = if values[0] > T::zero() { Extended::Infinite } else { Extended::Finite(T::zero()) };
        Ok(Self { kind: SetupKind::Step { breakpoints, values }, sup, ell })
    }

    pub fn kind(&self) -> &SetupKind<T> {
        &self.kind
    }

    /// `K(ξ)`: zero at the origin, `K_n` inside a piece, and the lower of the
    /// two neighbouring fees at a breakpoint.
    pub fn eval(&self, xi: T) -> Result<T, ModelError> {
        if xi < T::zero() || xi.is_nan() {
            return Err(ModelError::NegativeQuantity(xi.to_f64_lossy()));
        }
        Ok(self.eval_nonneg(xi))
    }

    pub(crate) fn eval_nonneg(&self, xi: T) -> T {
        if xi <= T::zero() {
            return T::zero();
        }
        match &self.kind {
            SetupKind::Constant { kappa } => *kappa,
            SetupKind::Step { breakpoints, values } => {
                // index of the first breakpoint ≥ xi
                let n = breakpoints.partition_point(|&q| q < xi);
                if n < breakpoints.len() && breakpoints[n] == xi {
                    values[n].min(values[n + 1])
                } else {
                    values[n]
                }
            }
        }
    }

    /// `liminf_{ξ↓0} K(ξ)/ξ`.
    pub fn ell(&self) -> Extended<T> {
        self.ell
    }

    /// `sup_ξ K(ξ)`.
    pub fn sup(&self) -> T {
        self.sup
    }

    /// `K(0+)`.
    pub fn first_fee(&self) -> T {
        self.fees()[0]
    }

    /// `[K_1, …, K_N]` (a single entry for a constant fee).
    pub fn fees(&self) -> &[T] {
        match &self.kind {
            SetupKind::Constant { kappa } => std::slice::from_ref(kappa),
            SetupKind::Step { values, .. } => values,
        }
    }

    /// `[Q_1, …, Q_{N−1}]`.
    pub fn breakpoints(&self) -> &[T] {
        match &self.kind {
            SetupKind::Constant { .. } => &[],
            SetupKind::Step { breakpoints, .. } => breakpoints,
        }
    }

    /// Piece `n` (0-based) as the open interval `(Q_n, Q_{n+1})` with
    /// `Q_0 = 0` and an infinite right end for the last piece.
    pub fn piece(&self, n: usize) -> (T, Extended<T>) {
        let q = self.breakpoints();
        let lo = if n == 0 { T::zero() } else { q[n - 1] };
        let hi = q.get(n).map_or(Extended::Infinite, |&v| Extended::Finite(v));
        (lo, hi)
    }

    pub fn pieces(&self) -> usize {
        self.fees().len()
    }
}

fn check_fee<T: Scalar>(name: &str, k: T, out: &mut Vec<Violation>) {
    if k.is_nan() || k < T::zero() {
        out.push(Violation::new(Condition::S1, Some(k.to_f64_lossy()), format!("{name} must be nonnegative")));
    } else if !k.is_finite() {
        out.push(Violation::new(Condition::S2, Some(k.to_f64_lossy()), format!("{name} must be finite")));
    }
}

/// `C(ξ) = K(ξ) + kξ` for `ξ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCostModel<T> {
    pub k: T,
    pub setup: SetupCostModel<T>,
}

impl<T: Scalar> OrderingCostModel<T> {
    pub fn new(k: T, setup: SetupCostModel<T>) -> Result<Self, ValidationError> {
        if !(k >= T::zero() && k.is_finite()) {
            return Err(ValidationError::single(
                Condition::Ordering,
                Some(k.to_f64_lossy()),
                "proportional ordering rate k must be nonnegative and finite",
            ));
        }
        Ok(Self { k, setup })
    }

    pub fn cost(&self, xi: T) -> Result<T, ModelError> {
        Ok(self.setup.eval(xi)? + self.k * xi)
    }
}
