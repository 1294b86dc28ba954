//! Experiment drivers behind the command-line tool.
//!
//! Every command takes an [`ExperimentConfig`] and an [`Instance`], returns
//! a serializable report, and, when an output directory is configured,
//! writes CSV files next to a JSON copy of the report. Arms and observables
//! are one-based in every file written here.
//!
//! | file               | columns                                                                    |
//! |--------------------|----------------------------------------------------------------------------|
//! | `trace.csv`        | `round,best,contender,probe1,probe2,stop_flag`                             |
//! | `summary.csv`      | `status,rounds,observations,recommendation,good_event,crossovers,n1..nL`   |
//! | `replications.csv` | `replication,status,rounds,observations,recommendation,correct,good_event` |
//! | `allocation.csv`   | `observable,n`                                                             |
//! | `sweep.csv`        | see [`SWEEP_HEADER`]                                                       |
//!
//! Rounds `T` and micro-observations `2T` are always reported side by side:
//! the lower bound counts observations, the round bounds count rounds.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    hardness_general, hardness_minimax, lower_bound_minimax, HardnessReport, HardnessVariant,
    LowerBound, LowerBoundOptions, DEFAULT_THETA_GRID,
};
use crate::envs::Instance;
use crate::error::{Error, Result};
use crate::game::RewardMap;
use crate::lucb::{self, LucbConfig, RunResult, RunStatus, DEFAULT_BUDGET_CAP};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub instance: Option<PathBuf>,
    pub delta: f64,
    pub reps: usize,
    pub seed: u64,
    pub cap: u64,
    pub theta_grid: usize,
    pub out: Option<PathBuf>,
    /// Worker threads for replications; `None` uses every core.
    pub workers: Option<usize>,
    pub variants: Vec<HardnessVariant>,
    /// Risk levels for `sweep`.
    pub deltas: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: None,
            delta: 0.1,
            reps: 100,
            seed: 0,
            cap: DEFAULT_BUDGET_CAP,
            theta_grid: DEFAULT_THETA_GRID,
            out: None,
            workers: None,
            variants: vec![HardnessVariant::Generic, HardnessVariant::Minimax],
            deltas: vec![0.1, 0.05, 0.01],
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Reads `key = value` lines; `#` starts a comment. Keys match the
    /// command-line flags, with `-` and `_` interchangeable.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "instance" => self.instance = Some(PathBuf::from(value)),
            "delta" => self.delta = parse_value(key, value)?,
            "reps" | "replications" => self.reps = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "cap" => self.cap = parse_value(key, value)?,
            "theta_grid" => self.theta_grid = parse_value(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(parse_value(key, value)?),
            "deltas" => self.deltas = parse_list(key, value)?,
            "variants" => {
                self.variants = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| match s {
                        "generic" => Ok(HardnessVariant::Generic),
                        "minimax" => Ok(HardnessVariant::Minimax),
                        _ => Err(Error::Config(format!("unknown bound variant {s:?}"))),
                    })
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        for &d in std::iter::once(&self.delta).chain(&self.deltas) {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::RiskOutOfRange(d));
            }
            if d > 0.1 {
                log::warn!("delta {d} above 0.1; the confidence bounds assume delta <= 0.1");
            }
        }
        Ok(())
    }

    pub fn load_instance(&self) -> Result<Instance> {
        let path = self
            .instance
            .as_ref()
            .ok_or_else(|| Error::Config("no instance file given".into()))?;
        Instance::load(path)
    }

    fn lucb(&self, delta: f64) -> LucbConfig {
        LucbConfig::new(delta).with_cap(self.cap)
    }

    fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(job()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(pool.install(job))
            }
        }
    }

    fn out_file(&self, name: &str) -> Result<Option<PathBuf>> {
        match &self.out {
            None => Ok(None),
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Ok(Some(dir.join(name)))
            }
        }
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if let Some(path) = self.out_file(name)? {
            fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: String,
    pub rounds: u64,
    pub observations: u64,
    /// One-based.
    pub recommendation: Option<usize>,
    pub good_event: bool,
    pub crossovers: u64,
    pub counts: Vec<u64>,
}

impl From<&RunResult> for RunSummary {
    fn from(r: &RunResult) -> Self {
        Self {
            status: status_label(&r.status).to_string(),
            rounds: r.rounds,
            observations: r.observations(),
            recommendation: r.recommendation.map(|j| j + 1),
            good_event: r.good_event,
            crossovers: r.crossovers,
            counts: r.counts.clone(),
        }
    }
}

fn status_label(s: &RunStatus) -> &'static str {
    match s {
        RunStatus::Decided => "decided",
        RunStatus::Undecided => "undecided",
        RunStatus::Failed(_) => "failed",
    }
}

/// One run on replication stream 0, with its trace.
pub fn cmd_run(instance: &Instance, config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let result = lucb::run(instance, &config.lucb(config.delta), config.seed, 0)?;
    if let Some(path) = config.out_file("trace.csv")? {
        result.write_trace_csv(fs::File::create(path)?)?;
    }
    if let Some(path) = config.out_file("summary.csv")? {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(RunResult::summary_header(instance.num_observables()))?;
        w.write_record(result.summary_record())?;
        w.flush()?;
    }
    config.write_json("run.json", &RunSummary::from(&result))?;
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStats {
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub min: u64,
    pub q10: u64,
    pub median: u64,
    pub q90: u64,
    pub max: u64,
}

impl RoundStats {
    pub fn from_rounds(rounds: &[u64]) -> Self {
        let n = rounds.len();
        let mean = rounds.iter().map(|&t| t as f64).sum::<f64>() / n as f64;
        let var = if n > 1 {
            rounds.iter().map(|&t| (t as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut sorted = rounds.to_vec();
        sorted.sort_unstable();
        // Nearest-rank quantiles.
        let q = |p: f64| sorted[((p * n as f64).ceil() as usize).clamp(1, n) - 1];
        Self {
            mean,
            std: var.sqrt(),
            min: sorted[0],
            q10: q(0.1),
            median: q(0.5),
            q90: q(0.9),
            max: sorted[n - 1],
        }
    }

    pub fn standard_error(&self, n: usize) -> f64 {
        self.std / (n as f64).sqrt()
    }
}

/// Round bound of one hardness variant together with the empirical
/// fraction of replications that stopped within it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundBoundCheck {
    pub variant: HardnessVariant,
    pub hardness: f64,
    pub t_star: u64,
    pub fraction_within: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub delta: f64,
    pub seed: u64,
    pub reps: usize,
    /// One-based ground-truth best arm.
    pub best_arm: usize,
    pub correct: usize,
    pub errors: usize,
    /// Replications without a decision, including failed ones.
    pub undecided: usize,
    pub failed: usize,
    pub error_rate: f64,
    pub correct_rate: f64,
    pub undecided_rate: f64,
    pub good_event_rate: f64,
    pub rounds: RoundStats,
    pub mean_observations: f64,
    pub observations_standard_error: f64,
    pub tau_star: f64,
    pub round_bounds: Vec<RoundBoundCheck>,
}

impl VerifyReport {
    pub fn round_bound(&self, variant: HardnessVariant) -> Option<&RoundBoundCheck> {
        self.round_bounds.iter().find(|b| b.variant == variant)
    }

    /// Three-sigma slack for a proportion `p` estimated from `reps` runs.
    pub fn three_sigma(&self, p: f64) -> f64 {
        3.0 * (p * (1.0 - p) / self.reps as f64).sqrt()
    }
}

fn hardness(reward: &RewardMap, mu: &[f64], variant: HardnessVariant) -> Result<HardnessReport> {
    match variant {
        HardnessVariant::Generic => hardness_general(reward, mu),
        HardnessVariant::Minimax => hardness_minimax(reward, mu),
    }
}

fn hardness_reports(instance: &Instance, config: &ExperimentConfig, delta: f64) -> Result<Vec<HardnessReport>> {
    if instance.num_arms() < 2 {
        return Ok(Vec::new());
    }
    config
        .variants
        .iter()
        .map(|&v| hardness(&instance.reward, &instance.means, v)?.with_risk(delta))
        .collect()
}

fn lower_bound_options(config: &ExperimentConfig) -> LowerBoundOptions {
    LowerBoundOptions { theta_grid: config.theta_grid, ..Default::default() }
}

/// `reps` replications on streams `0..reps`, each scored against the true
/// best arm. Results do not depend on the number of workers.
pub fn cmd_verify(instance: &Instance, config: &ExperimentConfig) -> Result<VerifyReport> {
    config.validate()?;
    verify_at(instance, config, config.delta, true)
}

fn verify_at(instance: &Instance, config: &ExperimentConfig, delta: f64, write: bool) -> Result<VerifyReport> {
    let best = instance.best_arm()?;
    let lucb_config = config.lucb(delta).without_trace();
    let results: Vec<RunResult> = config.in_pool(|| {
        (0..config.reps as u64)
            .into_par_iter()
            .map(|r| lucb::run(instance, &lucb_config, config.seed, r))
            .collect::<Result<Vec<_>>>()
    })??;

    let reps = results.len();
    let correct = results.iter().filter(|r| r.is_decided() && r.recommendation == Some(best)).count();
    let errors = results.iter().filter(|r| r.is_decided() && r.recommendation != Some(best)).count();
    let failed = results.iter().filter(|r| matches!(r.status, RunStatus::Failed(_))).count();
    let undecided = reps - correct - errors;
    let rounds: Vec<u64> = results.iter().map(|r| r.rounds).collect();
    let stats = RoundStats::from_rounds(&rounds);
    let good = results.iter().filter(|r| r.good_event).count();
    let round_bounds = hardness_reports(instance, config, delta)?
        .into_iter()
        .map(|h| {
            let t_star = h.t_star.expect("risk attached");
            let within = results.iter().filter(|r| r.is_decided() && r.rounds <= t_star).count();
            RoundBoundCheck {
                variant: h.variant,
                hardness: h.hardness,
                t_star,
                fraction_within: within as f64 / reps as f64,
            }
        })
        .collect();
    let lb = lower_bound_minimax(&instance.reward, &instance.means, delta, &lower_bound_options(config))?;

    let report = VerifyReport {
        delta,
        seed: config.seed,
        reps,
        best_arm: best + 1,
        correct,
        errors,
        undecided,
        failed,
        error_rate: errors as f64 / reps as f64,
        correct_rate: correct as f64 / reps as f64,
        undecided_rate: undecided as f64 / reps as f64,
        good_event_rate: good as f64 / reps as f64,
        mean_observations: 2.0 * stats.mean,
        observations_standard_error: 2.0 * stats.standard_error(reps),
        rounds: stats,
        tau_star: lb.tau_star(),
        round_bounds,
    };
    if write {
        if let Some(path) = config.out_file("replications.csv")? {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(REPLICATION_HEADER)?;
            for (i, r) in results.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    status_label(&r.status).to_string(),
                    r.rounds.to_string(),
                    r.observations().to_string(),
                    r.recommendation.map(|j| (j + 1).to_string()).unwrap_or_default(),
                    u8::from(r.is_decided() && r.recommendation == Some(best)).to_string(),
                    u8::from(r.good_event).to_string(),
                ])?;
            }
            w.flush()?;
        }
        config.write_json("verify.json", &report)?;
    }
    Ok(report)
}

pub const REPLICATION_HEADER: [&str; 7] =
    ["replication", "status", "rounds", "observations", "recommendation", "correct", "good_event"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub delta: f64,
    /// `"finite"` or `"infinite"`.
    pub status: String,
    /// Lower bound on expected micro-observations.
    pub tau_star: f64,
    pub allocation: Option<Vec<f64>>,
    /// One-based; absent for single-arm instances.
    pub best_arm: Option<usize>,
    pub hardness: Vec<HardnessReport>,
    pub upper_proof_sets: usize,
    pub lower_proof_sets: usize,
    pub constraints: usize,
    pub constraints_after_pruning: usize,
    pub theta_grid: usize,
}

pub fn cmd_bounds(instance: &Instance, config: &ExperimentConfig) -> Result<BoundsReport> {
    config.validate()?;
    let lb = lower_bound_minimax(&instance.reward, &instance.means, config.delta, &lower_bound_options(config))?;
    let report = BoundsReport {
        delta: config.delta,
        status: match lb.bound {
            LowerBound::Finite(_) => "finite",
            LowerBound::Infinite => "infinite",
        }
        .to_string(),
        tau_star: lb.tau_star(),
        allocation: lb.bound.allocation().map(|a| a.n.clone()),
        best_arm: lb.best_arm.map(|j| j + 1),
        hardness: hardness_reports(instance, config, config.delta)?,
        upper_proof_sets: lb.upper_sets,
        lower_proof_sets: lb.lower_sets,
        constraints: lb.constraints,
        constraints_after_pruning: lb.constraints_after_pruning,
        theta_grid: lb.theta_grid,
    };
    if let (Some(path), Some(n)) = (config.out_file("allocation.csv")?, &report.allocation) {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["observable", "n"])?;
        for (i, v) in n.iter().enumerate() {
            w.write_record([(i + 1).to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    config.write_json("bounds.json", &report)?;
    Ok(report)
}

pub const SWEEP_HEADER: [&str; 9] = [
    "delta",
    "tau_star",
    "t_star_generic",
    "t_star_minimax",
    "mean_rounds",
    "mean_observations",
    "error_rate",
    "undecided_rate",
    "status",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub tau_star: Option<f64>,
    pub t_star_generic: Option<u64>,
    pub t_star_minimax: Option<u64>,
    pub mean_rounds: Option<f64>,
    pub mean_observations: Option<f64>,
    pub error_rate: Option<f64>,
    pub undecided_rate: Option<f64>,
    /// `"ok"` or the error for this risk level.
    pub status: String,
}

/// `verify` at each risk level of `config.deltas`. A failing level yields
/// a row carrying its error instead of aborting the sweep.
pub fn cmd_sweep(instance: &Instance, config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let rows: Vec<SweepRow> = config
        .deltas
        .iter()
        .map(|&delta| match verify_at(instance, config, delta, false) {
            Ok(v) => SweepRow {
                delta,
                tau_star: Some(v.tau_star),
                t_star_generic: v.round_bound(HardnessVariant::Generic).map(|b| b.t_star),
                t_star_minimax: v.round_bound(HardnessVariant::Minimax).map(|b| b.t_star),
                mean_rounds: Some(v.rounds.mean),
                mean_observations: Some(v.mean_observations),
                error_rate: Some(v.error_rate),
                undecided_rate: Some(v.undecided_rate),
                status: "ok".into(),
            },
            Err(e) => SweepRow {
                delta,
                tau_star: None,
                t_star_generic: None,
                t_star_minimax: None,
                mean_rounds: None,
                mean_observations: None,
                error_rate: None,
                undecided_rate: None,
                status: e.to_string(),
            },
        })
        .collect();
    if let Some(path) = config.out_file("sweep.csv")? {
        write_sweep_csv(&rows, fs::File::create(path)?)?;
    }
    config.write_json("sweep.json", &rows)?;
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    fn cell<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map(T::to_string).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.delta.to_string(),
            cell(&r.tau_star),
            cell(&r.t_star_generic),
            cell(&r.t_star_minimax),
            cell(&r.mean_rounds),
            cell(&r.mean_observations),
            cell(&r.error_rate),
            cell(&r.undecided_rate),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
