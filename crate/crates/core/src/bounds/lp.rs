//! Dense simplex for covering programs
//!
//! ```text
//! minimize 1'x  subject to  A x >= 1,  x >= 0,   A >= 0
//! ```
//!
//! The dual `maximize 1'y s.t. A'y <= 1, y >= 0` has the origin as a feasible
//! basis, so it is solved directly with the primal simplex method and `x`
//! is read off the slack columns' reduced costs. No phase one is needed.

use crate::error::{Error, Result};

/// Feasibility tolerance on the recovered primal solution.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative tolerance on the primal/dual objective gap.
pub const OBJECTIVE_TOL: f64 = 1e-7;

const PIVOT_EPS: f64 = 1e-12;
const REDUCED_COST_EPS: f64 = 1e-11;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// Solves the covering program for constraint rows `rows` (each of length
/// `dim`, nonnegative, with at least one positive entry).
pub fn solve_covering(rows: &[Vec<f64>], dim: usize) -> Result<CoveringSolution> {
    let m = rows.len();
    if m == 0 {
        return Ok(CoveringSolution { x: vec![0.0; dim], objective: 0.0, pivots: 0 });
    }
    for (k, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
        }
        if r.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::Lp(format!("row {k} has a negative or non-finite entry")));
        }
        if !r.iter().any(|&a| a > 0.0) {
            return Err(Error::Lp(format!("row {k} is zero; the program is infeasible")));
        }
    }

    // Tableau of the dual: `dim` rows, columns are y_0..y_{m-1} then the
    // slacks s_0..s_{dim-1}, then the right-hand side.
    let cols = m + dim;
    let width = cols + 1;
    let mut t = vec![0.0; dim * width];
    for i in 0..dim {
        for (k, r) in rows.iter().enumerate() {
            t[i * width + k] = r[i];
        }
        t[i * width + m + i] = 1.0;
        t[i * width + cols] = 1.0;
    }
    // Reduced costs (maximization: optimal once none is positive) and the
    // current objective value.
    let mut cost = vec![0.0; cols];
    cost[..m].fill(1.0);
    let mut objective = 0.0;
    let mut basis: Vec<usize> = (m..cols).collect();

    let max_pivots = 50 * cols + 1000;
    let mut pivots = 0;
    let mut degenerate_run = 0;
    loop {
        let bland = degenerate_run >= DEGENERATE_LIMIT;
        let entering = if bland {
            (0..cols).find(|&j| cost[j] > REDUCED_COST_EPS)
        } else {
            let mut best: Option<usize> = None;
            for j in 0..cols {
                if cost[j] > REDUCED_COST_EPS && best.is_none_or(|b| cost[j] > cost[b]) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(e) = entering else { break };

        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..dim {
            let a = t[i * width + e];
            if a > PIVOT_EPS {
                let ratio = t[i * width + cols] / a;
                let better = match leaving {
                    None => true,
                    Some((l, r)) => ratio < r || (ratio == r && basis[i] < basis[l]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((r, ratio)) = leaving else {
            return Err(Error::Lp("dual unbounded; some constraint row is zero".into()));
        };
        degenerate_run = if ratio <= PIVOT_EPS { degenerate_run + 1 } else { 0 };

        let piv = t[r * width + e];
        for v in &mut t[r * width..(r + 1) * width] {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = t[r * width..(r + 1) * width].to_vec();
        for i in 0..dim {
            if i == r {
                continue;
            }
            let f = t[i * width + e];
            if f != 0.0 {
                for (v, p) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        let f = cost[e];
        for (c, p) in cost.iter_mut().zip(&pivot_row) {
            *c -= f * p;
        }
        objective += f * pivot_row[cols];
        basis[r] = e;

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Lp(format!("no convergence after {pivots} pivots")));
        }
    }

    let x: Vec<f64> = (0..dim).map(|i| (-cost[m + i]).max(0.0)).collect();
    let primal: f64 = x.iter().sum();
    for (k, r) in rows.iter().enumerate() {
        let lhs: f64 = r.iter().zip(&x).map(|(a, b)| a * b).sum();
        if lhs < 1.0 - FEASIBILITY_TOL * (1.0 + lhs.abs()) {
            return Err(Error::Lp(format!("recovered solution violates row {k}: {lhs} < 1")));
        }
    }
    if (primal - objective).abs() > OBJECTIVE_TOL * primal.abs().max(1.0) {
        return Err(Error::Lp(format!("duality gap: primal {primal}, dual {objective}")));
    }
    Ok(CoveringSolution { x, objective: primal, pivots })
}
