//! Best-arm identification with structured payoffs and noisy micro-observables.
//!
//! The learner samples `L` noisy micro-observables (terminal values of a
//! minimax game) and must name, with risk at most `delta`, the arm (first
//! move) whose payoff is largest. The crate provides
//!
//! - [`game`]: game structures, minimax evaluation, MinMax descent and the
//!   reward map,
//! - [`confidence`]: anytime confidence intervals with monotone clipping,
//! - [`lucb`]: the LUCB-micro algorithm and its MinMax specialization,
//! - [`bounds`]: the instance-dependent lower bound (a covering linear
//!   program over proof-set departures) and the hardness / stopping-time
//!   upper bounds,
//! - [`envs`]: problem instances and seeded noisy sampling,
//! - [`harness`]: run, verify, bounds and sweep experiments with CSV output.

pub mod bounds;
pub mod confidence;
pub mod envs;
mod error;
pub mod game;
pub mod harness;
pub mod lucb;

pub use error::{Error, Result};
pub use game::{GameStructure, Move, NodeId, Player, RewardMap, Valuation};
