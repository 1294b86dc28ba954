//! Lower and upper bounds on the number of observations.
//!
//! The lower bound is the value of a covering program
//!
//! ```text
//! minimize sum_i n(i)  s.t.  sum_i n(i) d_i^2 >= 2 ln(1 / (4 delta))  for every departure d
//! ```
//!
//! where the departures are the minimal significant ones generated from
//! pairs of proof sets and a grid of thresholds. The upper bounds are the
//! hardness `H(mu)` and the round bound `t*` it implies.

mod departure;
mod hardness;
pub mod lp;
mod proof_sets;

use rayon::prelude::*;
use serde::Serialize;

pub use departure::{departure_vector, is_significant, DeparturePattern};
pub use hardness::{
    hardness_general, hardness_minimax, path_values, sample_complexity, sample_complexity_scan,
    span, HardnessReport, HardnessVariant,
};
pub use proof_sets::{
    count_proof_sets, enumerate_proof_sets, verify_proof_set, Direction, ProofSet,
    DEFAULT_PROOF_SET_LIMIT,
};

use crate::envs::unique_argmax;
use crate::error::{Error, Result};
use crate::game::RewardMap;

pub const DEFAULT_THETA_GRID: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Allocation {
    pub n: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LowerBound {
    Finite(Allocation),
    /// Some departure is zero: the means sit on a decision boundary.
    Infinite,
}

impl LowerBound {
    pub fn tau_star(&self) -> f64 {
        match self {
            LowerBound::Finite(a) => a.objective,
            LowerBound::Infinite => f64::INFINITY,
        }
    }

    pub fn allocation(&self) -> Option<&Allocation> {
        match self {
            LowerBound::Finite(a) => Some(a),
            LowerBound::Infinite => None,
        }
    }
}

/// Right-hand side `2 ln(1 / (4 delta))`; needs `delta < 1/4`.
pub fn threshold(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::RiskOutOfRange(delta));
    }
    Ok(2.0 * (1.0 / (4.0 * delta)).ln())
}

/// Solves the program for an explicit list of departures over `dim`
/// observables.
pub fn lower_bound_general(constraints: &[Vec<f64>], dim: usize, delta: f64) -> Result<LowerBound> {
    let r = threshold(delta)?;
    let mut rows = Vec::with_capacity(constraints.len());
    for d in constraints {
        if d.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: d.len() });
        }
        if let Some(&bad) = d.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        if d.iter().all(|&v| v == 0.0) {
            return Ok(LowerBound::Infinite);
        }
        rows.push(d.iter().map(|v| v * v / r).collect::<Vec<f64>>());
    }
    let sol = lp::solve_covering(&rows, dim)?;
    Ok(LowerBound::Finite(Allocation { n: sol.x, objective: sol.objective }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBoundOptions {
    /// Interior grid points per threshold bracket.
    pub theta_grid: usize,
    /// Drop departures dominated in absolute value by another one.
    pub prune: bool,
    pub proof_set_limit: usize,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        Self { theta_grid: DEFAULT_THETA_GRID, prune: true, proof_set_limit: DEFAULT_PROOF_SET_LIMIT }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub bound: LowerBound,
    /// `None` for single-arm instances.
    pub best_arm: Option<usize>,
    pub upper_sets: usize,
    pub lower_sets: usize,
    pub constraints: usize,
    pub constraints_after_pruning: usize,
    pub theta_grid: usize,
}

impl LowerBoundReport {
    pub fn tau_star(&self) -> f64 {
        self.bound.tau_star()
    }
}

/// Thresholds for one bracket: the uniform grid with both endpoints and
/// every mean inside the bracket, sorted and deduplicated.
pub fn theta_grid(lo: f64, hi: f64, interior: usize, mu: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=interior + 1)
        .map(|k| lo + (hi - lo) * k as f64 / (interior + 1) as f64)
        .collect();
    grid.extend(mu.iter().copied().filter(|&m| m > lo && m < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Departures of every pattern `(arm, theta, B, B')` for the unique best
/// arm of `mu`. Empty for single-arm rewards.
pub fn departure_family(
    reward: &RewardMap,
    mu: &[f64],
    options: &LowerBoundOptions,
) -> Result<(Vec<Vec<f64>>, usize, usize)> {
    let f = reward.payoff(mu)?;
    if f.len() < 2 {
        return Ok((Vec::new(), 0, 0));
    }
    let best = unique_argmax(&f)?;
    let game = reward.as_game();
    let upper = enumerate_proof_sets(&game, best, Direction::Upper, options.proof_set_limit)?;
    let mut lower_count = 0;
    let mut family = Vec::new();
    for j in (0..f.len()).filter(|&j| j != best) {
        let lower = enumerate_proof_sets(&game, j, Direction::Lower, options.proof_set_limit)?;
        lower_count += lower.len();
        let grid = theta_grid(f[j], f[best], options.theta_grid, mu);
        let (upper, lower) = (&upper, &lower);
        let block: Vec<Vec<f64>> = grid
            .par_iter()
            .flat_map_iter(|&theta| {
                upper.iter().flat_map(move |b| {
                    lower.iter().map(move |bp| {
                        departure::departure_unchecked(mu, theta, &b.terminals, &bp.terminals)
                    })
                })
            })
            .collect();
        family.extend(block);
    }
    Ok((family, upper.len(), lower_count))
}

/// Every pattern behind [`departure_family`], in the same order.
pub fn departure_patterns(
    reward: &RewardMap,
    mu: &[f64],
    options: &LowerBoundOptions,
) -> Result<Vec<DeparturePattern>> {
    let f = reward.payoff(mu)?;
    if f.len() < 2 {
        return Ok(Vec::new());
    }
    let best = unique_argmax(&f)?;
    let game = reward.as_game();
    let upper = enumerate_proof_sets(&game, best, Direction::Upper, options.proof_set_limit)?;
    let mut out = Vec::new();
    for j in (0..f.len()).filter(|&j| j != best) {
        let lower = enumerate_proof_sets(&game, j, Direction::Lower, options.proof_set_limit)?;
        for theta in theta_grid(f[j], f[best], options.theta_grid, mu) {
            for b in &upper {
                for bp in &lower {
                    out.push(DeparturePattern {
                        best,
                        arm: j,
                        theta,
                        upper_set: b.terminals.clone(),
                        lower_set: bp.terminals.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Keeps only departures not dominated in absolute value by another one.
/// A departure `d` with `|e| <= |d|` entrywise for some other `e` adds no
/// constraint: any allocation meeting `e`'s constraint meets `d`'s.
/// Of several equal departures the first is kept.
pub fn prune_dominated(family: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mags: Vec<Vec<f64>> = family.iter().map(|d| d.iter().map(|v| v.abs()).collect()).collect();
    let keep: Vec<bool> = (0..mags.len())
        .into_par_iter()
        .map(|a| {
            !mags.iter().enumerate().any(|(b, e)| {
                b != a
                    && e.iter().zip(&mags[a]).all(|(x, y)| x <= y)
                    && (b < a || e != &mags[a])
            })
        })
        .collect();
    family.iter().zip(keep).filter(|(_, k)| *k).map(|(d, _)| d.clone()).collect()
}

/// The lower bound of a structured instance.
pub fn lower_bound_minimax(
    reward: &RewardMap,
    mu: &[f64],
    delta: f64,
    options: &LowerBoundOptions,
) -> Result<LowerBoundReport> {
    threshold(delta)?;
    let f = reward.payoff(mu)?;
    let best_arm = if f.len() >= 2 { Some(unique_argmax(&f)?) } else { None };
    let (family, upper_sets, lower_sets) = departure_family(reward, mu, options)?;
    let constraints = family.len();
    let family = if options.prune { prune_dominated(&family) } else { family };
    log::debug!("lower bound: {constraints} departures, {} after pruning", family.len());
    Ok(LowerBoundReport {
        bound: lower_bound_general(&family, mu.len(), delta)?,
        best_arm,
        upper_sets,
        lower_sets,
        constraints,
        constraints_after_pruning: family.len(),
        theta_grid: options.theta_grid,
    })
}
