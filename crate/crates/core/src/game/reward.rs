use std::borrow::Cow;
use std::sync::Arc;

use super::{check_ordered, GameStructure};
use crate::error::{Error, Result};

/// The reward map `f`: how arm payoffs follow from the micro-observable means.
#[derive(Clone, Debug, PartialEq)]
pub enum RewardMap {
    /// `f_j` is the minimax value of first move `j`.
    Minimax(Arc<GameStructure>),
    /// Plain best-arm identification: `K = L` and `f` is the identity.
    Identity(usize),
}

impl RewardMap {
    pub fn minimax(game: GameStructure) -> Self {
        RewardMap::Minimax(Arc::new(game))
    }

    pub fn num_arms(&self) -> usize {
        match self {
            RewardMap::Minimax(g) => g.num_arms(),
            RewardMap::Identity(l) => *l,
        }
    }

    pub fn num_observables(&self) -> usize {
        match self {
            RewardMap::Minimax(g) => g.num_terminals(),
            RewardMap::Identity(l) => *l,
        }
    }

    /// The game this map evaluates; identity maps become a depth-one max tree.
    pub fn as_game(&self) -> Cow<'_, GameStructure> {
        match self {
            RewardMap::Minimax(g) => Cow::Borrowed(g.as_ref()),
            RewardMap::Identity(l) => Cow::Owned(GameStructure::depth_one(*l)),
        }
    }

    pub fn payoff(&self, mu: &[f64]) -> Result<Vec<f64>> {
        match self {
            RewardMap::Minimax(g) => g.payoff(mu),
            RewardMap::Identity(l) => {
                if mu.len() != *l {
                    return Err(Error::DimensionMismatch { expected: *l, got: mu.len() });
                }
                Ok(mu.to_vec())
            }
        }
    }

    fn check_arm(&self, j: usize) -> Result<()> {
        if j >= self.num_arms() {
            return Err(Error::IndexOutOfRange { index: j, len: self.num_arms() });
        }
        Ok(())
    }

    /// `D(j, u, v)`: every observable whose interval contains arm `j`'s
    /// payoff interval `[f_j(u), f_j(v)]`, in increasing order.
    pub fn cover_set(&self, j: usize, u: &[f64], v: &[f64]) -> Result<Vec<usize>> {
        self.check_arm(j)?;
        check_ordered(u, v)?;
        let lo = self.payoff(u)?[j];
        let hi = self.payoff(v)?[j];
        Ok((0..u.len()).filter(|&i| u[i] <= lo && hi <= v[i]).collect())
    }

    /// One member of `D(j, u, v)`: the MinMax descent terminal for minimax
    /// maps, `j` itself for the identity.
    pub fn cover_pick(&self, j: usize, u: &[f64], v: &[f64]) -> Result<usize> {
        self.check_arm(j)?;
        check_ordered(u, v)?;
        match self {
            RewardMap::Minimax(g) => {
                let lower = g.evaluate(u)?;
                let upper = g.evaluate(v)?;
                let leaf = g.descend(g.arm_node(j)?, &lower, &upper);
                Ok(g.terminal(leaf).expect("descent ends on a maximal history"))
            }
            RewardMap::Identity(_) => Ok(j),
        }
    }
}
