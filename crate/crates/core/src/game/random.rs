//! Random game generation for property checks and stress runs.

use rand::Rng;

use super::{GameStructure, Move, Player, RawGame};

#[derive(Clone, Debug)]
pub struct RandomGameParams {
    pub max_depth: usize,
    pub max_branching: usize,
    /// Probability that a non-root node above `max_depth` is a leaf anyway.
    pub leaf_prob: f64,
    /// Probability that a new leaf reuses an existing terminal index.
    pub transposition_prob: f64,
    /// Alternate players by depth instead of drawing them at random.
    pub alternating: bool,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        Self {
            max_depth: 4,
            max_branching: 3,
            leaf_prob: 0.3,
            transposition_prob: 0.2,
            alternating: false,
        }
    }
}

/// Draws a valid game with at least two arms.
pub fn random_game<R: Rng + ?Sized>(rng: &mut R, params: &RandomGameParams) -> GameStructure {
    assert!(params.max_depth >= 1 && params.max_branching >= 2);
    let root_player = if rng.random_bool(0.5) { Player::Max } else { Player::Min };
    let mut raw = RawGame { root_player, ..RawGame::default() };
    let arms = rng.random_range(2..=params.max_branching);
    let mut stack: Vec<Vec<Move>> = (1..=arms as Move).rev().map(|m| vec![m]).collect();
    while let Some(h) = stack.pop() {
        let leaf = h.len() >= params.max_depth || rng.random_bool(params.leaf_prob);
        if leaf {
            let t = if raw.num_terminals > 0 && rng.random_bool(params.transposition_prob) {
                rng.random_range(0..raw.num_terminals)
            } else {
                raw.num_terminals += 1;
                raw.num_terminals - 1
            };
            raw.terminals.insert(h.clone(), t);
        } else {
            let player = if params.alternating {
                if h.len() % 2 == 1 {
                    root_player.opponent()
                } else {
                    root_player
                }
            } else if rng.random_bool(0.5) {
                Player::Max
            } else {
                Player::Min
            };
            raw.players.insert(h.clone(), player);
            let width = rng.random_range(1..=params.max_branching);
            for m in (1..=width as Move).rev() {
                let mut next = h.clone();
                next.push(m);
                stack.push(next);
            }
        }
        raw.histories.push(h);
    }
    GameStructure::from_raw(&raw).expect("generated game is valid")
}

/// A random valuation with entries in `[lo, hi)`.
pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}
