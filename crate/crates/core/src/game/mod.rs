//! Minimax game structures with noisy terminal values.
//!
//! A game is stored as an arena of nodes in depth-first preorder, one node
//! per history. Node 0 is the empty history; its children are the first
//! player's moves, which are the arms. Maximal histories carry a terminal
//! index in `0..L`; several maximal histories may share a terminal index
//! (transpositions).
//!
//! Because children always follow their parent in preorder, every
//! evaluation below is a single reverse sweep over a contiguous node range
//! and never recurses.

mod json;
pub mod random;
mod raw;
mod reward;

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use json::{GameFile, NodeSpec};
pub use raw::{
    validate_game, validate_game_with_cap, RawGame, ValidationReport, Violation,
    DEFAULT_MAX_DEPTH,
};
pub use reward::RewardMap;

pub type Move = u32;

/// Player on turn. `Max` is `p(h) = +1`, `Min` is `p(h) = -1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    #[default]
    Max,
    Min,
}

impl Player {
    pub fn sign(self) -> i8 {
        match self {
            Player::Max => 1,
            Player::Min => -1,
        }
    }

    pub fn from_sign(s: i64) -> Option<Self> {
        match s {
            1 => Some(Player::Max),
            -1 => Some(Player::Min),
            _ => None,
        }
    }

    pub fn opponent(self) -> Self {
        match self {
            Player::Max => Player::Min,
            Player::Min => Player::Max,
        }
    }

    /// True when `candidate` is strictly better than `incumbent` for this player.
    #[inline]
    fn prefers(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Player::Max => candidate > incumbent,
            Player::Min => candidate < incumbent,
        }
    }
}

/// Index of a history in a [`GameStructure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Debug, PartialEq)]
struct Node {
    parent: Option<usize>,
    mv: Move,
    depth: usize,
    /// `None` exactly on maximal histories.
    player: Option<Player>,
    /// Sorted by move identifier.
    children: Vec<usize>,
    terminal: Option<usize>,
    /// One past the last node of this subtree.
    end: usize,
}

/// A real vector indexed by terminal (micro-observable) index.
///
/// [`Valuation::new`] requires finite entries. Confidence limits use
/// [`Valuation::from_bounds`], which also admits `±inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Valuation(Vec<f64>);

impl Valuation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(x));
        }
        Ok(Self(values))
    }

    pub fn from_bounds(values: Vec<f64>) -> Result<Self> {
        if let Some(&x) = values.iter().find(|x| x.is_nan()) {
            return Err(Error::NonFinite(x));
        }
        Ok(Self(values))
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Valuation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Values of every history under one valuation, indexed by [`NodeId`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeValues(Vec<f64>);

impl NodeValues {
    pub fn get(&self, node: NodeId) -> f64 {
        self.0[node.0]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameStructure {
    nodes: Vec<Node>,
    num_terminals: usize,
    /// Terminal index -> maximal histories mapped to it.
    leaves_of: Vec<Vec<usize>>,
}

impl GameStructure {
    /// Validates `raw` and builds the arena form.
    pub fn from_raw(raw: &RawGame) -> Result<Self> {
        Self::from_raw_with_cap(raw, DEFAULT_MAX_DEPTH)
    }

    pub fn from_raw_with_cap(raw: &RawGame, max_depth: usize) -> Result<Self> {
        let report = validate_game_with_cap(raw, max_depth);
        if !report.is_ok() {
            return Err(Error::InvalidGame(report));
        }

        // Children of every history, keyed by the parent's move sequence.
        let mut kids: BTreeMap<&[Move], Vec<Move>> = BTreeMap::new();
        for h in &raw.histories {
            kids.entry(&h[..h.len() - 1]).or_default().push(h[h.len() - 1]);
        }
        for list in kids.values_mut() {
            list.sort_unstable();
        }

        let mut nodes: Vec<Node> = Vec::with_capacity(raw.histories.len() + 1);
        let mut path: Vec<Move> = Vec::new();
        // Explicit DFS stack: (node index, next child position).
        let mut stack: Vec<(usize, usize)> = Vec::new();
        nodes.push(Node {
            parent: None,
            mv: 0,
            depth: 0,
            player: Some(raw.root_player),
            children: Vec::new(),
            terminal: None,
            end: 0,
        });
        stack.push((0, 0));
        while let Some(&mut (idx, ref mut next)) = stack.last_mut() {
            let moves = kids.get(path.as_slice());
            let child_move = moves.and_then(|m| m.get(*next)).copied();
            match child_move {
                Some(m) => {
                    *next += 1;
                    path.push(m);
                    let maximal = !kids.contains_key(path.as_slice());
                    let child = nodes.len();
                    nodes.push(Node {
                        parent: Some(idx),
                        mv: m,
                        depth: path.len(),
                        player: if maximal { None } else { raw.players.get(&path).copied() },
                        children: Vec::new(),
                        terminal: if maximal { raw.terminals.get(&path).copied() } else { None },
                        end: 0,
                    });
                    nodes[idx].children.push(child);
                    stack.push((child, 0));
                }
                None => {
                    nodes[idx].end = nodes.len();
                    stack.pop();
                    if idx != 0 {
                        path.pop();
                    }
                }
            }
        }

        let mut leaves_of = vec![Vec::new(); raw.num_terminals];
        for (k, n) in nodes.iter().enumerate() {
            if let Some(t) = n.terminal {
                leaves_of[t].push(k);
            }
        }
        Ok(Self { nodes, num_terminals: raw.num_terminals, leaves_of })
    }

    /// Inverse of [`GameStructure::from_raw`].
    pub fn to_raw(&self) -> RawGame {
        let mut raw = RawGame {
            root_player: self.nodes[0].player.unwrap_or_default(),
            num_terminals: self.num_terminals,
            ..RawGame::default()
        };
        for k in 1..self.nodes.len() {
            let h = self.history(NodeId(k));
            let n = &self.nodes[k];
            if let Some(p) = n.player {
                raw.players.insert(h.clone(), p);
            }
            if let Some(t) = n.terminal {
                raw.terminals.insert(h.clone(), t);
            }
            raw.histories.push(h);
        }
        raw
    }

    /// One max node over `k` leaves; terminal `i` sits under arm `i`.
    pub fn depth_one(k: usize) -> Self {
        let mut raw = RawGame { num_terminals: k, ..RawGame::default() };
        for m in 1..=k as Move {
            raw.histories.push(vec![m]);
            raw.terminals.insert(vec![m], (m - 1) as usize);
        }
        Self::from_raw(&raw).expect("depth-one game is valid")
    }

    /// Root max node over `k` min nodes of `k` leaves each. Leaf `(j, i)`
    /// (moves `j`, `i`, both one-based) has terminal index `(j-1)*k + (i-1)`.
    pub fn two_layer(k: usize) -> Self {
        let mut raw = RawGame { num_terminals: k * k, ..RawGame::default() };
        for j in 1..=k as Move {
            raw.histories.push(vec![j]);
            raw.players.insert(vec![j], Player::Min);
            for i in 1..=k as Move {
                raw.histories.push(vec![j, i]);
                raw.terminals.insert(vec![j, i], (j as usize - 1) * k + (i as usize - 1));
            }
        }
        Self::from_raw(&raw).expect("two-layer game is valid")
    }

    pub fn num_arms(&self) -> usize {
        self.nodes[0].children.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.num_terminals
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn root_player(&self) -> Player {
        self.nodes[0].player.unwrap_or_default()
    }

    /// The length-one history of arm `j` (zero-based).
    pub fn arm_node(&self, j: usize) -> Result<NodeId> {
        self.nodes[0]
            .children
            .get(j)
            .map(|&c| NodeId(c))
            .ok_or(Error::IndexOutOfRange { index: j, len: self.num_arms() })
    }

    pub fn node(&self, history: &[Move]) -> Option<NodeId> {
        let mut cur = 0;
        for &m in history {
            let n = &self.nodes[cur];
            let pos = n.children.binary_search_by_key(&m, |&c| self.nodes[c].mv).ok()?;
            cur = n.children[pos];
        }
        Some(NodeId(cur))
    }

    fn require(&self, history: &[Move]) -> Result<NodeId> {
        self.node(history).ok_or_else(|| Error::UnknownHistory(history.to_vec()))
    }

    pub fn history(&self, node: NodeId) -> Vec<Move> {
        let mut h = Vec::with_capacity(self.nodes[node.0].depth);
        let mut cur = node.0;
        while let Some(p) = self.nodes[cur].parent {
            h.push(self.nodes[cur].mv);
            cur = p;
        }
        h.reverse();
        h
    }

    pub fn player(&self, node: NodeId) -> Option<Player> {
        self.nodes[node.0].player
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.nodes[node.0].depth
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.nodes[node.0].parent.map(NodeId)
    }

    pub fn is_maximal(&self, node: NodeId) -> bool {
        self.nodes[node.0].children.is_empty()
    }

    pub fn terminal(&self, node: NodeId) -> Option<usize> {
        self.nodes[node.0].terminal
    }

    pub fn move_of(&self, node: NodeId) -> Move {
        self.nodes[node.0].mv
    }

    /// Immediate successors in move order.
    pub fn children(&self, node: NodeId) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.nodes[node.0].children.iter().map(|&c| NodeId(c))
    }

    /// Maximal histories mapped to terminal `i`.
    pub fn leaves_for_terminal(&self, i: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.leaves_of[i].iter().map(|&c| NodeId(c))
    }

    /// Nodes of the subtree rooted at `node`, in preorder.
    pub fn subtree(&self, node: NodeId) -> impl Iterator<Item = NodeId> {
        (node.0..self.nodes[node.0].end).map(NodeId)
    }

    fn check_len(&self, mu: &[f64]) -> Result<()> {
        if mu.len() != self.num_terminals {
            return Err(Error::DimensionMismatch { expected: self.num_terminals, got: mu.len() });
        }
        Ok(())
    }

    /// Values of the nodes in `start..end` of the subtree at `start`,
    /// written to `out[k - start]`.
    fn eval_subtree(&self, start: usize, mu: &[f64], out: &mut Vec<f64>) {
        let end = self.nodes[start].end;
        out.clear();
        out.resize(end - start, 0.0);
        for k in (start..end).rev() {
            let n = &self.nodes[k];
            out[k - start] = match (n.terminal, n.player) {
                (Some(t), _) => mu[t],
                (None, Some(p)) => {
                    let mut it = n.children.iter().map(|&c| out[c - start]);
                    let first = it.next().expect("non-maximal node has a successor");
                    it.fold(first, |acc, x| if p.prefers(x, acc) { x } else { acc })
                }
                (None, None) => unreachable!("validated game"),
            };
        }
    }

    /// Evaluates every history under `mu`. Entries may be infinite.
    pub fn evaluate(&self, mu: &[f64]) -> Result<NodeValues> {
        self.check_len(mu)?;
        let mut out = Vec::new();
        self.eval_subtree(0, mu, &mut out);
        Ok(NodeValues(out))
    }

    /// [`GameStructure::evaluate`] into an existing buffer.
    pub fn evaluate_into(&self, mu: &[f64], out: &mut NodeValues) -> Result<()> {
        self.check_len(mu)?;
        self.eval_subtree(0, mu, &mut out.0);
        Ok(())
    }

    /// `V(h, mu)`.
    pub fn value(&self, history: &[Move], mu: &[f64]) -> Result<f64> {
        self.check_len(mu)?;
        let node = self.require(history)?;
        let mut out = Vec::new();
        self.eval_subtree(node.0, mu, &mut out);
        Ok(out[0])
    }

    /// `(f_1(mu), ..., f_K(mu))`.
    pub fn payoff(&self, mu: &[f64]) -> Result<Vec<f64>> {
        let values = self.evaluate(mu)?;
        Ok(self.payoff_from(&values))
    }

    pub fn payoff_from(&self, values: &NodeValues) -> Vec<f64> {
        self.nodes[0].children.iter().map(|&c| values.0[c]).collect()
    }

    fn best_child_by(&self, node: usize, value: impl Fn(usize) -> f64) -> Option<usize> {
        let n = &self.nodes[node];
        let p = n.player?;
        let mut best = *n.children.first()?;
        for &c in &n.children[1..] {
            if p.prefers(value(c), value(best)) {
                best = c;
            }
        }
        Some(best)
    }

    /// Child of `node` attaining its value; ties go to the smallest move.
    pub fn best_child(&self, node: NodeId, values: &NodeValues) -> Option<NodeId> {
        self.best_child_by(node.0, |c| values.0[c]).map(NodeId)
    }

    /// `m(h, mu)`: the move leading to the optimal immediate successor.
    pub fn optimal_move(&self, history: &[Move], mu: &[f64]) -> Result<Move> {
        self.check_len(mu)?;
        let node = self.require(history)?;
        if self.is_maximal(node) {
            return Err(Error::MaximalHistory(history.to_vec()));
        }
        let mut out = Vec::new();
        self.eval_subtree(node.0, mu, &mut out);
        let child = self.best_child_by(node.0, |c| out[c - node.0]).expect("non-maximal");
        Ok(self.nodes[child].mv)
    }

    /// MinMax descent on precomputed values: follow the best move under
    /// `lower` at minimizing turns and under `upper` at maximizing turns.
    pub fn descend(&self, start: NodeId, lower: &NodeValues, upper: &NodeValues) -> NodeId {
        let mut cur = start;
        while let Some(p) = self.nodes[cur.0].player {
            if self.nodes[cur.0].children.is_empty() {
                break;
            }
            let values = match p {
                Player::Min => lower,
                Player::Max => upper,
            };
            cur = self.best_child(cur, values).expect("non-maximal");
        }
        cur
    }

    /// MinMax descent from `start` with `u <= v`; returns the maximal
    /// history reached.
    pub fn minmax_descent(&self, start: &[Move], u: &[f64], v: &[f64]) -> Result<Vec<Move>> {
        check_ordered(u, v)?;
        let node = self.require(start)?;
        let lower = self.evaluate(u)?;
        let upper = self.evaluate(v)?;
        Ok(self.history(self.descend(node, &lower, &upper)))
    }
}

/// Errors unless `u <= v` componentwise.
pub(crate) fn check_ordered(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    for (i, (&a, &b)) in u.iter().zip(v).enumerate() {
        if a.is_nan() || b.is_nan() {
            return Err(Error::NonFinite(f64::NAN));
        }
        if a > b {
            return Err(Error::BoundsCrossed { index: i, lower: a, upper: b });
        }
    }
    Ok(())
}
