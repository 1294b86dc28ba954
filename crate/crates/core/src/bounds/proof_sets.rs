//! Proof sets: terminal sets whose values alone certify a bound on a move.
//!
//! An upper proof set for move `j` comes from a subtree of `j` that keeps
//! one successor at every minimizing history and all successors at every
//! maximizing history; setting its terminals to `theta` forces
//! `f_j <= theta`. Lower proof sets swap the roles of the two players.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{GameStructure, NodeId, Player};

pub const DEFAULT_PROOF_SET_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Certifies `f_j <= theta`.
    Upper,
    /// Certifies `f_j >= theta`.
    Lower,
}

impl Direction {
    /// The player whose histories keep a single successor.
    fn chooser(self) -> Player {
        match self {
            Direction::Upper => Player::Min,
            Direction::Lower => Player::Max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofSet {
    pub arm: usize,
    pub direction: Direction,
    /// Sorted terminal indices.
    pub terminals: Vec<usize>,
    /// The histories kept by the construction, in preorder.
    pub witness: Vec<NodeId>,
}

type Partial = (Vec<usize>, Vec<usize>);

fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Keeps the first witness for each distinct terminal set.
fn dedup(parts: Vec<Partial>) -> Vec<Partial> {
    let mut seen: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut order = Vec::new();
    for (terms, wit) in parts {
        if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(terms) {
            order.push(e.key().clone());
            e.insert(wit);
        }
    }
    order
        .into_iter()
        .map(|t| {
            let w = seen.remove(&t).expect("inserted");
            (t, w)
        })
        .collect()
}

/// Number of sets the construction generates before deduplication.
pub fn count_proof_sets(game: &GameStructure, j: usize, direction: Direction) -> Result<f64> {
    let root = game.arm_node(j)?;
    let nodes: Vec<NodeId> = game.subtree(root).collect();
    let base = root.0;
    let mut count = vec![0.0f64; nodes.len()];
    for &n in nodes.iter().rev() {
        count[n.0 - base] = match game.player(n) {
            _ if game.is_maximal(n) => 1.0,
            Some(p) if p == direction.chooser() => {
                game.children(n).map(|c| count[c.0 - base]).sum()
            }
            _ => game.children(n).map(|c| count[c.0 - base]).product(),
        };
    }
    Ok(count[0])
}

/// All proof sets of move `j` in `direction`, distinct by terminal set.
pub fn enumerate_proof_sets(
    game: &GameStructure,
    j: usize,
    direction: Direction,
    limit: usize,
) -> Result<Vec<ProofSet>> {
    let estimate = count_proof_sets(game, j, direction)?;
    if estimate > limit as f64 {
        return Err(Error::TooManyProofSets { estimate, limit });
    }
    let root = game.arm_node(j)?;
    let base = root.0;
    let nodes: Vec<NodeId> = game.subtree(root).collect();
    let mut partial: Vec<Option<Vec<Partial>>> = vec![None; nodes.len()];
    for &n in nodes.iter().rev() {
        let sets = if game.is_maximal(n) {
            let t = game.terminal(n).expect("maximal history has a terminal");
            vec![(vec![t], vec![n.0])]
        } else {
            let kids: Vec<Vec<Partial>> = game
                .children(n)
                .map(|c| partial[c.0 - base].take().expect("child done"))
                .collect();
            if game.player(n) == Some(direction.chooser()) {
                kids.into_iter()
                    .flatten()
                    .map(|(t, mut w)| {
                        w.insert(0, n.0);
                        (t, w)
                    })
                    .collect()
            } else {
                let mut acc: Vec<Partial> = vec![(Vec::new(), vec![n.0])];
                for kid in kids {
                    let mut next = Vec::with_capacity(acc.len() * kid.len());
                    for (at, aw) in &acc {
                        for (kt, kw) in &kid {
                            let mut w = aw.clone();
                            w.extend_from_slice(kw);
                            next.push((union_sorted(at, kt), w));
                        }
                    }
                    acc = dedup(next);
                }
                acc
            }
        };
        partial[n.0 - base] = Some(dedup(sets));
    }
    let sets = partial[0].take().expect("root done");
    Ok(sets
        .into_iter()
        .map(|(terminals, mut w)| {
            w.sort_unstable();
            ProofSet {
                arm: j,
                direction,
                terminals,
                witness: w.into_iter().map(NodeId).collect(),
            }
        })
        .collect())
}

/// Randomized check of a proof set against its defining property: on
/// random valuations, `f_j <= max` (upper) or `f_j >= min` (lower) over the
/// set, and pinning the set to `theta` bounds `f_j` by `theta`.
pub fn verify_proof_set<R: Rng + ?Sized>(
    game: &GameStructure,
    ps: &ProofSet,
    trials: usize,
    rng: &mut R,
) -> bool {
    if ps.terminals.is_empty() || ps.arm >= game.num_arms() {
        return false;
    }
    let l = game.num_terminals();
    let mut mu = vec![0.0; l];
    for _ in 0..trials {
        // Coarse values make ties common, which is where off-by-one
        // mistakes in the construction show up.
        for v in mu.iter_mut() {
            *v = rng.random_range(-4..=4) as f64 / 4.0;
        }
        let f = game.payoff(&mu).expect("sized")[ps.arm];
        let set_vals = ps.terminals.iter().map(|&i| mu[i]);
        let ok = match ps.direction {
            Direction::Upper => f <= set_vals.fold(f64::NEG_INFINITY, f64::max),
            Direction::Lower => f >= set_vals.fold(f64::INFINITY, f64::min),
        };
        if !ok {
            return false;
        }
        let theta = rng.random_range(-4..=4) as f64 / 4.0;
        for &i in &ps.terminals {
            mu[i] = theta;
        }
        let f = game.payoff(&mu).expect("sized")[ps.arm];
        let ok = match ps.direction {
            Direction::Upper => f <= theta,
            Direction::Lower => f >= theta,
        };
        if !ok {
            return false;
        }
    }
    true
}
