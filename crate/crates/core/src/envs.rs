//! Problem instances and seeded noisy observations.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameFile, GameStructure, NodeSpec, RewardMap, Valuation};

/// Observation noise around each mean. Every variant is 1-subgaussian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// Normal noise with standard deviation `sigma <= 1`.
    Gaussian { sigma: f64 },
    /// Uniform on `[-half_width, half_width]`, `half_width <= 1`.
    Uniform { half_width: f64 },
    Deterministic,
}

impl NoiseModel {
    pub const UNIT_GAUSSIAN: NoiseModel = NoiseModel::Gaussian { sigma: 1.0 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Gaussian { sigma } if !(sigma > 0.0 && sigma <= 1.0) => {
                Err(Error::InvalidNoise(format!("gaussian sigma {sigma} not in (0, 1]")))
            }
            // Support of width 2w is w-subgaussian by Hoeffding's lemma.
            NoiseModel::Uniform { half_width } if !(half_width > 0.0 && half_width <= 1.0) => {
                Err(Error::InvalidNoise(format!("uniform half-width {half_width} not in (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            NoiseModel::Uniform { half_width } => rng.random_range(-half_width..=half_width),
            NoiseModel::Deterministic => 0.0,
        }
    }
}

/// Random stream for replication `stream` of an experiment seeded with
/// `seed`. ChaCha streams are independent and need no burn-in, so any
/// replication can be regenerated on its own.
#[derive(Clone, Debug)]
pub struct SeededStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub reward: RewardMap,
    pub means: Valuation,
    pub noise: NoiseModel,
}

impl Instance {
    pub fn new(reward: RewardMap, means: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        if means.len() != reward.num_observables() {
            return Err(Error::DimensionMismatch {
                expected: reward.num_observables(),
                got: means.len(),
            });
        }
        Ok(Self { reward, means: Valuation::new(means)?, noise })
    }

    pub fn num_arms(&self) -> usize {
        self.reward.num_arms()
    }

    pub fn num_observables(&self) -> usize {
        self.reward.num_observables()
    }

    pub fn payoff(&self) -> Vec<f64> {
        self.reward.payoff(&self.means).expect("means sized at construction")
    }

    /// One draw from observable `i`.
    pub fn sample(&self, i: usize, stream: &mut SeededStream) -> Result<f64> {
        let mu = *self
            .means
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, len: self.num_observables() })?;
        Ok(mu + self.noise.draw(stream.rng()))
    }

    /// The arm with the largest payoff; errors if it is not unique.
    pub fn best_arm(&self) -> Result<usize> {
        unique_argmax(&self.payoff())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<InstanceFile>(text)?.to_instance()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self)).expect("serializable")
    }
}

/// Index of the unique maximum, or [`Error::NotUnique`] on a tie.
pub fn unique_argmax(values: &[f64]) -> Result<usize> {
    let mut best = 0;
    for j in 1..values.len() {
        if values[j] > values[best] {
            best = j;
        }
    }
    if let Some(j) = (0..values.len()).find(|&j| j != best && values[j] >= values[best]) {
        return Err(Error::NotUnique(best.min(j), best.max(j), values[best]));
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

/// Instance file: a game file plus `means` and `noise`. Identity instances
/// set `"kind": "identity"` and omit `nodes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(rename = "L")]
    pub num_terminals: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<NodeSpec>,
    pub means: Vec<f64>,
    pub noise: NoiseSpec,
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance> {
        let reward = match self.kind.as_deref() {
            Some("identity") => RewardMap::Identity(self.num_terminals),
            None | Some("minimax") => {
                let nodes = self
                    .nodes
                    .clone()
                    .ok_or_else(|| Error::Config("minimax instance needs \"nodes\"".into()))?;
                let file = GameFile { num_terminals: self.num_terminals, nodes };
                RewardMap::minimax(file.to_game()?)
            }
            Some(other) => return Err(Error::Config(format!("unknown instance kind {other:?}"))),
        };
        let noise = match (self.noise.kind.as_str(), self.noise.param) {
            ("gaussian", p) => NoiseModel::Gaussian { sigma: p.unwrap_or(1.0) },
            ("uniform", Some(w)) => NoiseModel::Uniform { half_width: w },
            ("uniform", None) => {
                return Err(Error::InvalidNoise("uniform noise needs \"param\"".into()))
            }
            ("deterministic", _) => NoiseModel::Deterministic,
            (other, _) => return Err(Error::InvalidNoise(format!("unknown kind {other:?}"))),
        };
        Instance::new(reward, self.means.clone(), noise)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let (kind, nodes) = match &inst.reward {
            RewardMap::Identity(_) => (Some("identity".to_string()), None),
            RewardMap::Minimax(g) => (None, Some(GameFile::from_game(g).nodes)),
        };
        let noise = match inst.noise {
            NoiseModel::Gaussian { sigma } => NoiseSpec { kind: "gaussian".into(), param: Some(sigma) },
            NoiseModel::Uniform { half_width } => {
                NoiseSpec { kind: "uniform".into(), param: Some(half_width) }
            }
            NoiseModel::Deterministic => NoiseSpec { kind: "deterministic".into(), param: None },
        };
        InstanceFile {
            kind,
            num_terminals: inst.num_observables(),
            nodes,
            means: inst.means.to_vec(),
            noise,
        }
    }
}

impl GameStructure {
    /// Convenience for instances over an existing game.
    pub fn instance(self, means: Vec<f64>, noise: NoiseModel) -> Result<Instance> {
        Instance::new(RewardMap::minimax(self), means, noise)
    }
}
