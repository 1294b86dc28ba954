//! Minimal significant departures built from pairs of proof sets.

use crate::error::{Error, Result};
use crate::game::RewardMap;

/// A departure that pushes the best arm's value down to `theta` through
/// `upper_set` and lifts arm `arm` up to `theta` through `lower_set`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeparturePattern {
    /// The best arm under the unperturbed means.
    pub best: usize,
    /// The arm being promoted.
    pub arm: usize,
    pub theta: f64,
    /// Upper proof set of `best`, sorted.
    pub upper_set: Vec<usize>,
    /// Lower proof set of `arm`, sorted.
    pub lower_set: Vec<usize>,
}

/// Departure vector of `pattern` at means `mu`.
pub fn departure_vector(reward: &RewardMap, mu: &[f64], pattern: &DeparturePattern) -> Result<Vec<f64>> {
    let f = reward.payoff(mu)?;
    let k = f.len();
    for &a in &[pattern.best, pattern.arm] {
        if a >= k {
            return Err(Error::IndexOutOfRange { index: a, len: k });
        }
    }
    let (lo, hi) = (f[pattern.arm], f[pattern.best]);
    if !(pattern.theta >= lo && pattern.theta <= hi) {
        return Err(Error::ThetaOutOfBracket { theta: pattern.theta, lo, hi });
    }
    Ok(departure_unchecked(mu, pattern.theta, &pattern.upper_set, &pattern.lower_set))
}

/// The four-case formula without the bracket check. Both sets must be
/// sorted and in range.
pub(crate) fn departure_unchecked(mu: &[f64], theta: f64, upper: &[usize], lower: &[usize]) -> Vec<f64> {
    let mut delta = vec![0.0; mu.len()];
    for &i in upper {
        delta[i] = -(mu[i] - theta).max(0.0);
    }
    for &i in lower {
        delta[i] = if upper.binary_search(&i).is_ok() {
            theta - mu[i]
        } else {
            (theta - mu[i]).max(0.0)
        };
    }
    delta
}

/// Whether arm `best` stops being the strict winner under `mu + delta`.
///
/// The perturbed means are formed in floating point, so a departure that
/// lands exactly on a tie can come out a few ulps to either side; ties are
/// detected up to a relative tolerance of `1e-12`.
pub fn is_significant(reward: &RewardMap, mu: &[f64], delta: &[f64]) -> Result<bool> {
    if delta.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: delta.len() });
    }
    let f = reward.payoff(mu)?;
    let best = argmax(&f);
    let moved: Vec<f64> = mu.iter().zip(delta).map(|(m, d)| m + d).collect();
    let g = reward.payoff(&moved)?;
    let rival = g
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != best)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * g[best].abs().max(rival.abs()).max(1.0);
    Ok(g[best] <= rival + tol)
}

fn argmax(f: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in f.iter().enumerate() {
        if v > f[best] {
            best = j;
        }
    }
    best
}
