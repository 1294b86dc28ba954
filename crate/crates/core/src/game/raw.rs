//! History-set form of a game and its structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Move, Player};

/// Default cap on history length accepted by validation.
pub const DEFAULT_MAX_DEPTH: usize = 10_000;

/// A game given as an explicit set of histories: `H`, `p` and `tau` as maps
/// keyed by move sequences.
///
/// Terminal labels are zero-based here; file formats use one-based labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawGame {
    /// Player on turn at the empty history (the first player).
    pub root_player: Player,
    pub histories: Vec<Vec<Move>>,
    pub players: BTreeMap<Vec<Move>, Player>,
    pub terminals: BTreeMap<Vec<Move>, usize>,
    pub num_terminals: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyMoveSet,
    EmptyHistory,
    DuplicateHistory(Vec<Move>),
    PrefixClosure { history: Vec<Move>, missing: Vec<Move> },
    TerminalOnNonMaximal(Vec<Move>),
    TerminalOnUnknownHistory(Vec<Move>),
    MissingTerminal(Vec<Move>),
    TerminalOutOfRange { history: Vec<Move>, terminal: usize, num_terminals: usize },
    NotSurjective { unreached: Vec<usize> },
    MissingPlayer(Vec<Move>),
    TooDeep { history: Vec<Move>, cap: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyMoveSet => write!(f, "empty move set"),
            Violation::EmptyHistory => write!(f, "zero-length history listed"),
            Violation::DuplicateHistory(h) => write!(f, "duplicate history {h:?}"),
            Violation::PrefixClosure { history, missing } => {
                write!(f, "prefix-closure: {history:?} listed without its prefix {missing:?}")
            }
            Violation::TerminalOnNonMaximal(h) => {
                write!(f, "terminal_map on non-maximal history {h:?}")
            }
            Violation::TerminalOnUnknownHistory(h) => {
                write!(f, "terminal_map on unknown history {h:?}")
            }
            Violation::MissingTerminal(h) => write!(f, "maximal history {h:?} has no terminal"),
            Violation::TerminalOutOfRange { history, terminal, num_terminals } => write!(
                f,
                "terminal {terminal} of {history:?} outside 0..{num_terminals}"
            ),
            Violation::NotSurjective { unreached } => {
                write!(f, "terminal_map not surjective: {unreached:?} unreached")
            }
            Violation::MissingPlayer(h) => write!(f, "non-maximal history {h:?} has no player"),
            Violation::TooDeep { history, cap } => {
                write!(f, "history of length {} exceeds depth cap {cap}", history.len())
            }
        }
    }
}

/// Outcome of [`validate_game`]; empty means the game is well formed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_game(raw: &RawGame) -> ValidationReport {
    validate_game_with_cap(raw, DEFAULT_MAX_DEPTH)
}

pub fn validate_game_with_cap(raw: &RawGame, max_depth: usize) -> ValidationReport {
    let mut violations = Vec::new();
    let mut set: BTreeSet<&[Move]> = BTreeSet::new();
    for h in &raw.histories {
        if h.is_empty() {
            violations.push(Violation::EmptyHistory);
            continue;
        }
        if !set.insert(h.as_slice()) {
            violations.push(Violation::DuplicateHistory(h.clone()));
        }
    }
    if !set.iter().any(|h| h.len() == 1) {
        violations.push(Violation::EmptyMoveSet);
    }

    // A history is non-maximal iff it is the immediate parent of another one.
    let mut non_maximal: BTreeSet<&[Move]> = BTreeSet::new();
    for h in &set {
        if h.len() > max_depth {
            violations.push(Violation::TooDeep { history: h.to_vec(), cap: max_depth });
        }
        for k in 1..h.len() {
            if !set.contains(&h[..k]) {
                violations.push(Violation::PrefixClosure {
                    history: h.to_vec(),
                    missing: h[..k].to_vec(),
                });
                break;
            }
        }
        if h.len() > 1 {
            non_maximal.insert(&h[..h.len() - 1]);
        }
    }

    let mut reached = vec![false; raw.num_terminals];
    for (h, &t) in &raw.terminals {
        if !set.contains(h.as_slice()) {
            violations.push(Violation::TerminalOnUnknownHistory(h.clone()));
        } else if non_maximal.contains(h.as_slice()) {
            violations.push(Violation::TerminalOnNonMaximal(h.clone()));
        }
        if t >= raw.num_terminals {
            violations.push(Violation::TerminalOutOfRange {
                history: h.clone(),
                terminal: t,
                num_terminals: raw.num_terminals,
            });
        } else {
            reached[t] = true;
        }
    }
    for h in &set {
        let maximal = !non_maximal.contains(h);
        if maximal && !raw.terminals.contains_key(*h) {
            violations.push(Violation::MissingTerminal(h.to_vec()));
        }
        if !maximal && !raw.players.contains_key(*h) {
            violations.push(Violation::MissingPlayer(h.to_vec()));
        }
    }
    let unreached: Vec<usize> = reached
        .iter()
        .enumerate()
        .filter(|(_, &r)| !r)
        .map(|(i, _)| i)
        .collect();
    if !unreached.is_empty() {
        violations.push(Violation::NotSurjective { unreached });
    }
    ValidationReport { violations }
}
