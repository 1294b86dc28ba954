//! LUCB-micro and its MinMax specialization.
//!
//! Every round the algorithm names a candidate best arm `B` (largest payoff
//! under the lower confidence limits) and a contender `C` (largest payoff
//! under the upper limits among the other arms), samples one
//! micro-observable covering each arm's payoff interval, and stops once
//! `f_B(lower) >= f_C(upper)`.
//!
//! Candidates for the stopping test are recomputed from the intervals after
//! the round's update, so the test always compares against the strongest
//! current contender.

use std::io::Write;

use crate::confidence::ConfidenceTracker;
use crate::envs::{Instance, SeededStream};
use crate::error::{Error, Result};
use crate::game::{check_ordered, NodeValues, RewardMap};

pub const DEFAULT_BUDGET_CAP: u64 = 10_000_000;

/// How a micro-observable is picked from `D(j, lower, upper)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProbeRule {
    /// MinMax descent for minimax maps, the arm itself for the identity.
    #[default]
    MinMax,
    /// Smallest index in the full cover set.
    CoverMin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LucbConfig {
    pub delta: f64,
    pub budget_cap: u64,
    pub probe_rule: ProbeRule,
    pub record_trace: bool,
}

impl LucbConfig {
    pub fn new(delta: f64) -> Self {
        Self { delta, budget_cap: DEFAULT_BUDGET_CAP, probe_rule: ProbeRule::MinMax, record_trace: true }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.budget_cap = cap;
        self
    }

    pub fn with_probe_rule(mut self, rule: ProbeRule) -> Self {
        self.probe_rule = rule;
        self
    }

    pub fn without_trace(mut self) -> Self {
        self.record_trace = false;
        self
    }
}

/// One sampling round. Arms and observables are zero-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    /// One-based round index.
    pub round: u64,
    pub best: usize,
    pub contender: usize,
    pub probe1: usize,
    pub probe2: usize,
    /// Payoff interval of `best` when it was selected.
    pub best_interval: (f64, f64),
    /// Payoff interval of `contender` when it was selected.
    pub contender_interval: (f64, f64),
    pub stopped: bool,
}

/// Payoffs under the current confidence limits.
#[derive(Clone, Debug, Default)]
struct PayoffBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
    lower_nodes: NodeValues,
    upper_nodes: NodeValues,
}

/// `(B, C)` from payoffs under the lower and upper limits; ties go to the
/// smallest arm index.
pub fn select_candidates(lower_payoff: &[f64], upper_payoff: &[f64]) -> Result<(usize, usize)> {
    let k = lower_payoff.len();
    if k < 2 {
        return Err(Error::TooFewArms(k));
    }
    if upper_payoff.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: upper_payoff.len() });
    }
    let best = argmax(0..k, lower_payoff);
    let contender = argmax((0..k).filter(|&j| j != best), upper_payoff);
    Ok((best, contender))
}

fn argmax(mut idx: impl Iterator<Item = usize>, values: &[f64]) -> usize {
    let mut best = idx.next().expect("nonempty");
    for j in idx {
        if values[j] > values[best] {
            best = j;
        }
    }
    best
}

/// The stopping test `f_B(lower) >= f_C(upper)`.
pub fn stop_rule(best_lower: f64, contender_upper: f64) -> bool {
    best_lower >= contender_upper
}

#[derive(Clone, Debug)]
pub struct LucbState {
    tracker: ConfidenceTracker,
    reward: RewardMap,
    probe_rule: ProbeRule,
    budget_cap: u64,
    record_trace: bool,
    round: u64,
    best: usize,
    contender: usize,
    probes: Option<(usize, usize)>,
    stopped: bool,
    recommendation: Option<usize>,
    bounds: PayoffBounds,
    trace: Vec<RoundRecord>,
}

impl LucbState {
    pub fn new(reward: RewardMap, config: &LucbConfig) -> Result<Self> {
        if reward.num_arms() < 2 {
            return Err(Error::TooFewArms(reward.num_arms()));
        }
        let tracker = ConfidenceTracker::new(config.delta, reward.num_observables())?;
        let mut state = Self {
            tracker,
            reward,
            probe_rule: config.probe_rule,
            budget_cap: config.budget_cap,
            record_trace: config.record_trace,
            round: 0,
            best: 0,
            contender: 1,
            probes: None,
            stopped: false,
            recommendation: None,
            bounds: PayoffBounds::default(),
            trace: Vec::new(),
        };
        state.refresh()?;
        Ok(state)
    }

    /// Records whether every interval keeps covering `means`.
    pub fn with_truth(mut self, means: &[f64]) -> Result<Self> {
        self.tracker = self.tracker.with_truth(means)?;
        Ok(self)
    }

    pub fn tracker(&self) -> &ConfidenceTracker {
        &self.tracker
    }

    pub fn reward(&self) -> &RewardMap {
        &self.reward
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Micro-observations taken so far; two per round.
    pub fn observations(&self) -> u64 {
        2 * self.round
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn recommendation(&self) -> Option<usize> {
        self.recommendation
    }

    /// Candidates for the current intervals.
    pub fn candidates(&self) -> (usize, usize) {
        (self.best, self.contender)
    }

    /// Probes of the last completed round.
    pub fn probes(&self) -> Option<(usize, usize)> {
        self.probes
    }

    pub fn trace(&self) -> &[RoundRecord] {
        &self.trace
    }

    /// Payoff interval `[f_j(lower), f_j(upper)]` under the current limits.
    pub fn payoff_interval(&self, j: usize) -> (f64, f64) {
        (self.bounds.lower[j], self.bounds.upper[j])
    }

    fn refresh(&mut self) -> Result<()> {
        let lo = self.tracker.lower_bounds();
        let hi = self.tracker.upper_bounds();
        match &self.reward {
            RewardMap::Minimax(g) => {
                g.evaluate_into(lo, &mut self.bounds.lower_nodes)?;
                g.evaluate_into(hi, &mut self.bounds.upper_nodes)?;
                self.bounds.lower = g.payoff_from(&self.bounds.lower_nodes);
                self.bounds.upper = g.payoff_from(&self.bounds.upper_nodes);
            }
            RewardMap::Identity(_) => {
                self.bounds.lower.clear();
                self.bounds.lower.extend_from_slice(lo);
                self.bounds.upper.clear();
                self.bounds.upper.extend_from_slice(hi);
            }
        }
        let (b, c) = select_candidates(&self.bounds.lower, &self.bounds.upper)?;
        self.best = b;
        self.contender = c;
        Ok(())
    }

    /// `(B, C)` for the current intervals.
    pub fn select_candidates(&self) -> Result<(usize, usize)> {
        select_candidates(&self.bounds.lower, &self.bounds.upper)
    }

    /// Observables to sample for `best` and `contender`. Fails with
    /// [`Error::BoundsCrossed`] if clipping has crossed some interval and
    /// the rule needs ordered limits.
    pub fn select_observables(&self, best: usize, contender: usize) -> Result<(usize, usize)> {
        let lo = self.tracker.lower_bounds();
        let hi = self.tracker.upper_bounds();
        match (self.probe_rule, &self.reward) {
            (ProbeRule::MinMax, RewardMap::Identity(_)) => Ok((best, contender)),
            (ProbeRule::MinMax, RewardMap::Minimax(g)) => {
                check_ordered(lo, hi)?;
                let pick = |j| -> Result<usize> {
                    let leaf = g.descend(g.arm_node(j)?, &self.bounds.lower_nodes, &self.bounds.upper_nodes);
                    Ok(g.terminal(leaf).expect("descent ends on a maximal history"))
                };
                Ok((pick(best)?, pick(contender)?))
            }
            (ProbeRule::CoverMin, reward) => {
                let pick = |j| -> Result<usize> {
                    let set = reward.cover_set(j, lo, hi)?;
                    set.first().copied().ok_or(Error::Lp(format!("empty cover set for arm {j}")))
                };
                Ok((pick(best)?, pick(contender)?))
            }
        }
    }

    /// Stopping test on the current intervals and candidates.
    pub fn should_stop(&self) -> bool {
        stop_rule(self.bounds.lower[self.best], self.bounds.upper[self.contender])
    }

    /// One round: select, sample both probes, update, test for stopping.
    pub fn step(&mut self, env: &Instance, stream: &mut SeededStream) -> Result<()> {
        if self.stopped {
            return Err(Error::AlreadyStopped);
        }
        if self.round >= self.budget_cap {
            return Err(Error::BudgetExhausted(self.budget_cap));
        }
        let (best, contender) = (self.best, self.contender);
        let best_interval = self.payoff_interval(best);
        let contender_interval = self.payoff_interval(contender);
        let (p1, p2) = self.select_observables(best, contender)?;
        let y1 = env.sample(p1, stream)?;
        let y2 = env.sample(p2, stream)?;
        self.tracker.observe(p1, y1)?;
        self.tracker.observe(p2, y2)?;
        self.round += 1;
        self.probes = Some((p1, p2));
        self.refresh()?;
        if self.should_stop() {
            self.stopped = true;
            self.recommendation = Some(self.best);
        }
        if self.record_trace {
            self.trace.push(RoundRecord {
                round: self.round,
                best,
                contender,
                probe1: p1,
                probe2: p2,
                best_interval,
                contender_interval,
                stopped: self.stopped,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Decided,
    /// Budget exhausted before the stopping rule fired.
    Undecided,
    /// Interval limits crossed where ordered limits were required.
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub status: RunStatus,
    /// Rounds `T`; the run took `2T` micro-observations.
    pub rounds: u64,
    pub recommendation: Option<usize>,
    pub trace: Vec<RoundRecord>,
    pub counts: Vec<u64>,
    pub good_event: bool,
    pub crossovers: u64,
}

impl RunResult {
    pub fn observations(&self) -> u64 {
        2 * self.rounds
    }

    pub fn is_decided(&self) -> bool {
        self.status == RunStatus::Decided
    }

    /// CSV trace: `round,best,contender,probe1,probe2,stop_flag`, one-based.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for r in &self.trace {
            w.write_record([
                r.round.to_string(),
                (r.best + 1).to_string(),
                (r.contender + 1).to_string(),
                (r.probe1 + 1).to_string(),
                (r.probe2 + 1).to_string(),
                u8::from(r.stopped).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_header(num_observables: usize) -> Vec<String> {
        let mut h: Vec<String> =
            ["status", "rounds", "observations", "recommendation", "good_event", "crossovers"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        h.extend((1..=num_observables).map(|i| format!("n{i}")));
        h
    }

    /// One summary row matching [`RunResult::summary_header`].
    pub fn summary_record(&self) -> Vec<String> {
        let status = match &self.status {
            RunStatus::Decided => "decided".to_string(),
            RunStatus::Undecided => "undecided".to_string(),
            RunStatus::Failed(_) => "failed".to_string(),
        };
        let mut row = vec![
            status,
            self.rounds.to_string(),
            self.observations().to_string(),
            self.recommendation.map(|j| (j + 1).to_string()).unwrap_or_default(),
            u8::from(self.good_event).to_string(),
            self.crossovers.to_string(),
        ];
        row.extend(self.counts.iter().map(|n| n.to_string()));
        row
    }
}

pub const TRACE_HEADER: [&str; 6] = ["round", "best", "contender", "probe1", "probe2", "stop_flag"];

/// Runs LUCB-micro on `instance` until it stops or exhausts the budget.
///
/// A single-arm instance is decided without sampling.
pub fn run(instance: &Instance, config: &LucbConfig, seed: u64, stream: u64) -> Result<RunResult> {
    if !(config.delta > 0.0 && config.delta <= 0.1) {
        log::warn!("delta {} outside (0, 0.1]; stopping-time bound may not hold", config.delta);
    }
    if instance.num_arms() == 1 {
        return Ok(RunResult {
            status: RunStatus::Decided,
            rounds: 0,
            recommendation: Some(0),
            trace: Vec::new(),
            counts: vec![0; instance.num_observables()],
            good_event: true,
            crossovers: 0,
        });
    }
    let mut state = LucbState::new(instance.reward.clone(), config)?.with_truth(&instance.means)?;
    let mut rng = SeededStream::new(seed, stream);
    let status = loop {
        match state.step(instance, &mut rng) {
            Ok(()) if state.is_stopped() => break RunStatus::Decided,
            Ok(()) => {}
            Err(Error::BudgetExhausted(_)) => break RunStatus::Undecided,
            Err(e @ Error::BoundsCrossed { .. }) => break RunStatus::Failed(e.to_string()),
            Err(e) => return Err(e),
        }
    };
    Ok(RunResult {
        status,
        rounds: state.round,
        recommendation: state.recommendation,
        counts: state.tracker.counts().to_vec(),
        good_event: state.tracker.good_event().unwrap_or(true),
        crossovers: state.tracker.crossovers(),
        trace: std::mem::take(&mut state.trace),
    })
}
