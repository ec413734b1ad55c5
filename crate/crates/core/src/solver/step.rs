use rayon::prelude::*;
use serde::Serialize;

use super::{solve_constant, ConstantKSolution, SolverError};
use crate::analytics::AnalyticsContext;
use crate::scalar::{Extended, Scalar};

/// Where the unconstrained optimum `ξ̂_n` of piece `n` falls relative to the
/// piece `(Q_{n−1}, Q_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// `ξ̂_n ≤ Q_{n−1}`.
    Below,
    /// `Q_{n−1} < ξ̂_n < Q_n`.
    Inside,
    /// `ξ̂_n ≥ Q_n`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRow<T> {
    /// 1-based piece index.
    pub n: usize,
    pub fee: T,
    pub lower: T,
    pub upper: Extended<T>,
    pub constant: ConstantKSolution<T>,
    pub membership: Membership,
    /// `ξ̂_n` clamped to `[Q_{n−1}, Q_n]`.
    pub xi_star: T,
    /// `K(ξ*_n) = K_n`.
    pub candidate: bool,
    pub s: Option<T>,
    #[serde(rename = "S")]
    pub big_s: Option<T>,
    /// Average cost at `ξ*_n`; only for candidates.
    pub nu: Option<T>,
    /// `θ_n(ξ*_n)`, the cost at `ξ*_n` if the fee were `K_n`.
    pub nu_tilde: T,
    /// For a pruned piece: the neighbouring candidate that beats it.
    pub dominated_by: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateTable<T> {
    pub rows: Vec<CandidateRow<T>>,
    /// 1-based index of the selected piece.
    pub n_star: usize,
}

impl<T: Scalar> CandidateTable<T> {
    pub fn selected(&self) -> &CandidateRow<T> {
        &self.rows[self.n_star - 1]
    }
}

/// Piece-by-piece optimisation for a step setup cost with `K_1 > 0`.
pub fn candidate_table<T: Scalar>(ctx: &AnalyticsContext<T>) -> Result<CandidateTable<T>, SolverError> {
    let setup = ctx.instance().setup();
    let pieces = setup.pieces();
    let mu = ctx.instance().mu();
    let k = ctx.instance().ordering.k;

    let constants: Vec<ConstantKSolution<T>> = (0..pieces)
        .into_par_iter()
        .map(|i| solve_constant(ctx, setup.fees()[i]))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(pieces);
    for (i, c) in constants.into_iter().enumerate() {
        let fee = setup.fees()[i];
        let (lower, upper) = setup.piece(i);
        let xi_hat = c.xi_hat;
        let (membership, xi_star) = if xi_hat <= lower {
            (Membership::Below, lower)
        } else if upper.finite().is_some_and(|q| xi_hat >= q) {
            (Membership::Above, upper.finite().expect("finite upper"))
        } else {
            (Membership::Inside, xi_hat)
        };
        let candidate = membership == Membership::Inside || setup.eval_nonneg(xi_star) == fee;
        let (nu_tilde, s, big_s, nu) = if membership == Membership::Inside {
            (c.nu_hat, Some(c.s_hat), Some(c.big_s_hat), Some(c.nu_hat))
        } else {
            let m = ctx.matched_levels(xi_star)?;
            let area = ctx.integral_g0(m.s_tilde, m.big_s_tilde, None)?;
            let cost = k * mu + fee * mu / xi_star + mu / xi_star * area;
            if candidate {
                (cost, Some(m.s_tilde), Some(m.big_s_tilde), Some(cost))
            } else {
                (cost, None, None, None)
            }
        };
        rows.push(CandidateRow {
            n: i + 1,
            fee,
            lower,
            upper,
            constant: c,
            membership,
            xi_star,
            candidate,
            s,
            big_s,
            nu,
            nu_tilde,
            dominated_by: None,
        });
    }

    // a pruned piece must be beaten by the nearest candidate on the side
    // its clamped quantity points to
    for i in 0..rows.len() {
        if rows[i].candidate {
            continue;
        }
        let neighbour = match rows[i].membership {
            Membership::Below => rows[..i].iter().rev().find(|r| r.candidate),
            Membership::Above => rows[i + 1..].iter().find(|r| r.candidate),
            Membership::Inside => None,
        };
        match neighbour {
            Some(r) if r.nu.expect("candidate has a cost") < rows[i].nu_tilde => {
                let n = r.n;
                rows[i].dominated_by = Some(n);
            }
            _ => return Err(SolverError::PruningViolated { n: rows[i].n }),
        }
    }

    let mut best: Option<(usize, T)> = None;
    for r in rows.iter().filter(|r| r.candidate) {
        let nu = r.nu.expect("candidate has a cost");
        if best.is_none_or(|(_, b)| nu < b) {
            best = Some((r.n, nu));
        }
    }
    let (n_star, _) = best.ok_or(SolverError::EmptyCandidateSet)?;
    Ok(CandidateTable { rows, n_star })
}
