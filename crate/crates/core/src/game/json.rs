//! JSON game files.
//!
//! ```json
//! { "L": 2,
//!   "nodes": { "player": 1, "children": {
//!       "1": { "terminal": 1 },
//!       "2": { "terminal": 2 } } } }
//! ```
//!
//! `player` is `1` (max) or `-1` (min); `terminal` is one-based. Move
//! identifiers are unsigned integers written as object keys. The number of
//! arms is the number of root children.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GameStructure, Move, NodeId, Player, RawGame};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<BTreeMap<String, NodeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    #[serde(rename = "L")]
    pub num_terminals: usize,
    pub nodes: NodeSpec,
}

impl GameFile {
    pub fn from_game(game: &GameStructure) -> Self {
        // Build bottom-up over the preorder arena so no recursion is needed.
        let mut specs: Vec<Option<NodeSpec>> = vec![None; game.num_nodes()];
        for k in (0..game.num_nodes()).rev() {
            let node = NodeId(k);
            let spec = if let Some(t) = game.terminal(node) {
                NodeSpec { player: None, children: None, terminal: Some(t + 1) }
            } else {
                let children = game
                    .children(node)
                    .map(|c| {
                        let s = specs[c.0].take().expect("child built before parent");
                        (game.move_of(c).to_string(), s)
                    })
                    .collect();
                NodeSpec {
                    player: game.player(node).map(|p| p.sign() as i64),
                    children: Some(children),
                    terminal: None,
                }
            };
            specs[k] = Some(spec);
        }
        GameFile {
            num_terminals: game.num_terminals(),
            nodes: specs[0].take().expect("root"),
        }
    }

    pub fn to_raw(&self) -> Result<RawGame> {
        let mut raw = RawGame { num_terminals: self.num_terminals, ..RawGame::default() };
        if self.nodes.terminal.is_some() {
            return Err(Error::Config("root node cannot be terminal".into()));
        }
        raw.root_player = match self.nodes.player {
            Some(s) => Player::from_sign(s)
                .ok_or_else(|| Error::Config(format!("invalid player {s} at root")))?,
            None => Player::Max,
        };
        let mut stack: Vec<(Vec<Move>, &NodeSpec)> = Vec::new();
        for (m, child) in self.nodes.children.iter().flatten() {
            stack.push((vec![parse_move(m)?], child));
        }
        while let Some((h, spec)) = stack.pop() {
            match (&spec.children, spec.terminal) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(format!(
                        "node {h:?} has both children and a terminal"
                    )))
                }
                (None, None) => {
                    return Err(Error::Config(format!(
                        "node {h:?} has neither children nor a terminal"
                    )))
                }
                (None, Some(t)) => {
                    if t == 0 {
                        return Err(Error::Config(format!(
                            "terminal labels are one-based, node {h:?} has 0"
                        )));
                    }
                    raw.terminals.insert(h.clone(), t - 1);
                }
                (Some(children), None) => {
                    let s = spec
                        .player
                        .ok_or_else(|| Error::Config(format!("node {h:?} has no player")))?;
                    let p = Player::from_sign(s)
                        .ok_or_else(|| Error::Config(format!("invalid player {s} at {h:?}")))?;
                    raw.players.insert(h.clone(), p);
                    for (m, child) in children {
                        let mut next = h.clone();
                        next.push(parse_move(m)?);
                        stack.push((next, child));
                    }
                }
            }
            raw.histories.push(h);
        }
        Ok(raw)
    }

    pub fn to_game(&self) -> Result<GameStructure> {
        GameStructure::from_raw(&self.to_raw()?)
    }
}

fn parse_move(key: &str) -> Result<Move> {
    key.parse().map_err(|_| Error::Config(format!("move id {key:?} is not an unsigned integer")))
}

impl GameStructure {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text)?;
        file.to_game()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GameFile::from_game(self)).expect("serializable")
    }
}
