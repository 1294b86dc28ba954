//! Hardness of an instance and the round bound it implies.

use serde::Serialize;

use crate::confidence::{beta, MAX_OBSERVABLE_RISK};
use crate::error::{Error, Result};
use crate::game::{GameStructure, RewardMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HardnessVariant {
    /// Distances of each mean to the midpoint only.
    Generic,
    /// Distances measured by the span of the values along each
    /// terminal's path.
    Minimax,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardnessReport {
    pub variant: HardnessVariant,
    /// Midpoint between the two largest payoffs.
    pub c: f64,
    /// Gap between the two largest payoffs.
    pub gap: f64,
    pub hardness: f64,
    /// Per-observable terms; `hardness` is their sum.
    pub terms: Vec<f64>,
    /// Round bound, once a risk level is attached.
    pub t_star: Option<u64>,
}

impl HardnessReport {
    pub fn with_risk(mut self, delta: f64) -> Result<Self> {
        self.t_star = Some(sample_complexity(self.hardness, delta, self.terms.len())?);
        Ok(self)
    }
}

/// Midpoint and gap of the two largest payoffs.
fn midpoint_and_gap(f: &[f64]) -> Result<(f64, f64)> {
    if f.len() < 2 {
        return Err(Error::TooFewArms(f.len()));
    }
    let mut sorted = f.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let gap = sorted[0] - sorted[1];
    if !(gap > 0.0) {
        let best = f.iter().position(|&v| v == sorted[0]).unwrap_or(0);
        let other = (0..f.len()).find(|&j| j != best && f[j] == sorted[1]).unwrap_or(0);
        return Err(Error::NotUnique(best.min(other), best.max(other), sorted[0]));
    }
    Ok(((sorted[0] + sorted[1]) / 2.0, gap))
}

fn clipped(dist: f64, gap: f64) -> f64 {
    (1.0 / (dist * dist)).min(4.0 / (gap * gap))
}

pub fn hardness_general(reward: &RewardMap, mu: &[f64]) -> Result<HardnessReport> {
    let (c, gap) = midpoint_and_gap(&reward.payoff(mu)?)?;
    let terms: Vec<f64> = mu.iter().map(|&m| clipped(c - m, gap)).collect();
    Ok(HardnessReport {
        variant: HardnessVariant::Generic,
        c,
        gap,
        hardness: terms.iter().sum(),
        terms,
        t_star: None,
    })
}

pub fn hardness_minimax(reward: &RewardMap, mu: &[f64]) -> Result<HardnessReport> {
    let game = reward.as_game();
    let (c, gap) = midpoint_and_gap(&reward.payoff(mu)?)?;
    let values = game.evaluate(mu)?;
    let terms: Vec<f64> = (0..mu.len())
        .map(|i| {
            let mut set = path_values_from(&game, i, |n| values.get(n));
            set.push(c);
            set.push(mu[i]);
            clipped(span(&set).expect("nonempty"), gap)
        })
        .collect();
    Ok(HardnessReport {
        variant: HardnessVariant::Minimax,
        c,
        gap,
        hardness: terms.iter().sum(),
        terms,
        t_star: None,
    })
}

/// Values of the proper nonempty prefixes of the unique history ending at
/// terminal `i`, shallowest first. Empty when `i` is reached by more than
/// one history.
pub fn path_values(game: &GameStructure, i: usize, mu: &[f64]) -> Result<Vec<f64>> {
    if i >= game.num_terminals() {
        return Err(Error::IndexOutOfRange { index: i, len: game.num_terminals() });
    }
    let values = game.evaluate(mu)?;
    Ok(path_values_from(game, i, |n| values.get(n)))
}

fn path_values_from(
    game: &GameStructure,
    i: usize,
    value: impl Fn(crate::game::NodeId) -> f64,
) -> Vec<f64> {
    let mut leaves = game.leaves_for_terminal(i);
    let (Some(leaf), None) = (leaves.next(), leaves.next()) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut node = game.parent(leaf);
    while let Some(n) = node {
        if game.depth(n) == 0 {
            break;
        }
        out.push(value(n));
        node = game.parent(n);
    }
    out.reverse();
    out
}

/// `max - min` of a nonempty set.
pub fn span(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySpan);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

fn satisfied(t: u64, h: f64, risk: f64) -> bool {
    1.0 + 8.0 * h * beta(t, risk).expect("risk checked") <= t as f64
}

fn check_inputs(h: f64, delta: f64, num_observables: usize) -> Result<f64> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::NonFinite(h));
    }
    if num_observables == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let risk = delta / (2.0 * num_observables as f64);
    // Beyond this level the confidence exponent can go negative and the
    // defining inequality may hold, fail and hold again.
    if !(risk > 0.0 && risk <= MAX_OBSERVABLE_RISK) {
        return Err(Error::RiskOutOfRange(delta));
    }
    Ok(risk)
}

/// Smallest round `t >= 1` with `1 + 8 h beta(t, delta / (2L)) <= t`, by
/// doubling and bisection.
pub fn sample_complexity(h: f64, delta: f64, num_observables: usize) -> Result<u64> {
    let risk = check_inputs(h, delta, num_observables)?;
    if satisfied(1, h, risk) {
        return Ok(1);
    }
    // Invariant: the inequality fails at `lo` and holds at `hi`.
    let mut lo = 1u64;
    let mut hi = 2u64;
    while !satisfied(hi, h, risk) {
        lo = hi;
        hi = hi.checked_mul(2).ok_or(Error::NonFinite(h))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if satisfied(mid, h, risk) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Same quantity as [`sample_complexity`] by scanning `t = 1, 2, ...`.
pub fn sample_complexity_scan(h: f64, delta: f64, num_observables: usize) -> Result<u64> {
    let risk = check_inputs(h, delta, num_observables)?;
    Ok((1u64..).find(|&t| satisfied(t, h, risk)).expect("exists"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_layer_means(k: usize, hi: f64, lo: f64) -> Vec<f64> {
        let mut mu = vec![lo; k * k];
        mu[..k].fill(hi);
        mu
    }

    #[test]
    fn two_armed_identity() {
        let r = hardness_general(&RewardMap::Identity(2), &[1.0, 0.0]).unwrap();
        assert_eq!((r.c, r.gap, r.hardness), (0.5, 1.0, 8.0));
        let m = hardness_minimax(&RewardMap::Identity(2), &[1.0, 0.0]).unwrap();
        assert_eq!(m.hardness, 8.0);
    }

    #[test]
    fn midpoint_mean_is_clipped() {
        // Payoffs 1 and 0, so c = 0.5 equals the last leaf.
        let reward = RewardMap::minimax(GameStructure::two_layer(2));
        let r = hardness_general(&reward, &[1.0, 1.0, 0.0, 0.5]).unwrap();
        assert_eq!(r.terms[3], 4.0);
        assert!(hardness_general(&RewardMap::Identity(2), &[0.3, 0.3]).is_err());
    }

    #[test]
    fn homogeneity() {
        let mu = [0.9, 0.35, 0.1, -0.2];
        let a = hardness_general(&RewardMap::Identity(4), &mu).unwrap().hardness;
        let scaled: Vec<f64> = mu.iter().map(|m| m * 3.0).collect();
        let b = hardness_general(&RewardMap::Identity(4), &scaled).unwrap().hardness;
        assert_relative_eq!(b, a / 9.0, max_relative = 1e-12);
    }

    #[test]
    fn spans() {
        assert_relative_eq!(span(&[0.2, 0.8, 0.5]).unwrap(), 0.6);
        assert_eq!(span(&[0.4]).unwrap(), 0.0);
        assert!(span(&[]).is_err());
    }

    #[test]
    fn path_value_rules() {
        let k = 3;
        let g = GameStructure::two_layer(k);
        let mut mu = two_layer_means(k, 0.8, 0.2);
        mu[1] = 0.9;
        // Leaf (1, 2): only strict prefix is (1), worth min(0.8, 0.9, 0.8).
        assert_eq!(path_values(&g, 1, &mu).unwrap(), vec![0.8]);
        assert!(path_values(&GameStructure::depth_one(2), 0, &[0.0, 1.0]).unwrap().is_empty());
    }

    #[test]
    fn two_layer_closed_form() {
        // Per leaf (a, b): span of {min of arm a, mu_ab, c}.
        let k = 3;
        let mu = vec![0.8, 0.95, 0.85, 0.2, 0.4, 0.3, 0.1, 0.7, 0.15];
        let reward = RewardMap::minimax(GameStructure::two_layer(k));
        let m = hardness_minimax(&reward, &mu).unwrap();
        let g = hardness_general(&reward, &mu).unwrap();
        let (c, gap) = (0.5, 0.6);
        assert_relative_eq!(m.c, c, max_relative = 1e-12);
        assert_relative_eq!(m.gap, gap, max_relative = 1e-12);
        for a in 0..k {
            let row = &mu[a * k..(a + 1) * k];
            let low = row.iter().cloned().fold(f64::INFINITY, f64::min);
            for b in 0..k {
                let x = row[b];
                let s = (low - c).abs().max((x - low).abs()).max((x - c).abs());
                let expect = (1.0 / (s * s)).min(4.0 / (gap * gap));
                assert_relative_eq!(m.terms[a * k + b], expect, max_relative = 1e-12);
            }
        }
        assert!(m.hardness <= g.hardness);
    }

    #[test]
    fn round_bound() {
        assert_eq!(sample_complexity(0.0, 0.1, 2).unwrap(), 1);
        let t = sample_complexity(8.0, 0.1, 2).unwrap();
        assert_eq!(t, sample_complexity_scan(8.0, 0.1, 2).unwrap());
        assert!(t > 100 && t < 2000, "{t}");
        assert!(sample_complexity(9.0, 0.1, 2).unwrap() >= t);
        assert!(sample_complexity(8.0, 0.5, 2).is_err());
        let r = hardness_general(&RewardMap::Identity(2), &[1.0, 0.0]).unwrap().with_risk(0.1).unwrap();
        assert_eq!(r.t_star, Some(t));
    }
}
