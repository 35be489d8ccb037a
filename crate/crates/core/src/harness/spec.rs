use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, AlgorithmId};
use crate::envs::{ChainSpec, EnvId, ModelFile, MomdpModel};
use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::tlo::TloUtility;

pub const DEFAULT_TRIALS: u32 = 20;

/// Where an experiment's model comes from: a built-in environment or a
/// declarative model file (written `file:<path>`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EnvSource {
    Builtin(EnvId),
    File(PathBuf),
}

impl EnvSource {
    pub fn load(&self, chain: Option<&ChainSpec>) -> Result<MomdpModel> {
        match self {
            EnvSource::Builtin(id) => id.build(chain),
            EnvSource::File(path) => ModelFile::load(path)?.into_model(),
        }
    }
}

impl fmt::Display for EnvSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSource::Builtin(id) => write!(f, "{id}"),
            EnvSource::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for EnvSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(EnvSource::File(PathBuf::from(path))),
            Some(_) => Err(Error::config("file: environment needs a path")),
            None => s.parse().map(EnvSource::Builtin),
        }
    }
}

impl TryFrom<String> for EnvSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EnvSource> for String {
    fn from(e: EnvSource) -> Self {
        e.to_string()
    }
}

/// A complete, reproducible description of a multi-trial experiment.
///
/// The TOML form mirrors the fields one-to-one; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub environment: EnvSource,
    pub algorithm: AlgorithmId,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    /// Replaces the model's thresholds when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<Decimal>>,
    /// Route of the extra-state environment; ignored by the others.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Maximum concurrently running trials; all cores when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub agent: AgentConfig,
}

fn default_trials() -> u32 {
    DEFAULT_TRIALS
}

impl ExperimentSpec {
    pub fn new(environment: EnvSource, algorithm: AlgorithmId) -> Self {
        ExperimentSpec {
            environment,
            algorithm,
            trials: DEFAULT_TRIALS,
            seed: 0,
            thresholds: None,
            chain: None,
            output: None,
            jobs: None,
            agent: AgentConfig::default(),
        }
    }

    pub fn episodes(&self) -> u64 {
        self.agent.episodes
    }

    /// Changes the episode budget, stretching every schedule whose horizon
    /// spanned the old budget so it still spans the whole run.
    pub fn set_episodes(&mut self, episodes: u64) {
        let old = self.agent.episodes;
        for s in [&mut self.agent.alpha, &mut self.agent.temperature] {
            if let Schedule::LinearDecay { horizon, .. } = s {
                if *horizon == old {
                    *horizon = episodes;
                }
            }
        }
        self.agent.episodes = episodes;
    }

    /// Learning rate decaying linearly from 0.01 to `last` over the run.
    pub fn set_decayed_alpha(&mut self, initial: f64, last: f64) {
        self.agent.alpha = Schedule::linear(initial, last, self.agent.episodes);
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("at least one trial is required"));
        }
        // TOML integers are signed.
        if self.seed > i64::MAX as u64 {
            return Err(Error::config("seed must be at most 2^63 - 1"));
        }
        if self.jobs == Some(0) {
            return Err(Error::config("jobs must be at least 1"));
        }
        self.agent.validate()
    }

    /// Loads the model with any threshold override applied.
    pub fn model(&self) -> Result<MomdpModel> {
        let model = self.environment.load(self.chain.as_ref())?;
        match &self.thresholds {
            Some(t) => model.with_utility(TloUtility::new(t.clone())),
            None => Ok(model),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("experiment config: {e}")))
    }

    /// Seed of trial `k`.
    pub fn trial_seed(&self, k: u32) -> u64 {
        trial_seed(self.seed, k)
    }
}

/// Seed of trial `k` under master seed `master`: output `k + 1` of a
/// SplitMix64 generator whose state starts at `master`. Pure 64-bit integer
/// arithmetic, so stable across platforms, and any trial can be re-run
/// alone.
pub fn trial_seed(master: u64, k: u32) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(u64::from(k) + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Named experiment set-ups: `(name, description)`.
pub const PRESETS: [(&str, &str); 14] = [
    (
        "ch4-baseline",
        "expected-reward baseline, original, constant alpha",
    ),
    (
        "ch5-reward-design",
        "expected-reward baseline, reward-design variant",
    ),
    (
        "ch5-extra-state",
        "expected-reward baseline, extra-state variant",
    ),
    ("ch6-moss", "single-phase MOSS, original, constant alpha"),
    (
        "ch6-moss-swapped",
        "single-phase MOSS, swapped variant, constant alpha",
    ),
    (
        "ch7-moss-two-phase",
        "two-phase MOSS, original, constant alpha",
    ),
    (
        "ch7-moss-two-phase-swapped",
        "two-phase MOSS, swapped variant, constant alpha",
    ),
    ("ch8-options", "policy options, original, constant alpha"),
    (
        "ch8-options-swapped",
        "policy options, swapped variant, constant alpha",
    ),
    (
        "ch8-options-decayed",
        "policy options, original, decayed alpha",
    ),
    (
        "ch9-baseline-decayed",
        "expected-reward baseline, original, decayed alpha",
    ),
    (
        "ch9-moss-decayed",
        "single-phase MOSS, original, decayed alpha",
    ),
    (
        "ch9-moss-decayed-swapped",
        "single-phase MOSS, swapped variant, decayed alpha",
    ),
    (
        "ch9-moss-two-phase-decayed",
        "two-phase MOSS, original, decayed alpha",
    ),
];

/// The preset named `name` (without the `preset:` prefix).
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    use AlgorithmId::*;
    use EnvId::*;
    let (env, algorithm, decayed) = match name {
        "ch4-baseline" => (Original, BaselineExpected, false),
        "ch5-reward-design" => (RewardDesign, BaselineExpected, false),
        "ch5-extra-state" => (ExtraState, BaselineExpected, false),
        "ch6-moss" => (Original, Moss, false),
        "ch6-moss-swapped" => (Swapped, Moss, false),
        "ch7-moss-two-phase" => (Original, MossTwoPhase, false),
        "ch7-moss-two-phase-swapped" => (Swapped, MossTwoPhase, false),
        "ch8-options" => (Original, Options, false),
        "ch8-options-swapped" => (Swapped, Options, false),
        "ch8-options-decayed" => (Original, Options, true),
        "ch9-baseline-decayed" => (Original, BaselineExpected, true),
        "ch9-moss-decayed" => (Original, Moss, true),
        "ch9-moss-decayed-swapped" => (Swapped, Moss, true),
        "ch9-moss-two-phase-decayed" => (Original, MossTwoPhase, true),
        _ => {
            let known: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            return Err(Error::config(format!(
                "unknown preset {name:?} (known: {})",
                known.join(", ")
            )));
        }
    };
    let mut spec = ExperimentSpec::new(EnvSource::Builtin(env), algorithm);
    if decayed {
        spec.agent.alpha = AgentConfig::decayed_alpha(spec.agent.episodes);
    }
    Ok(spec)
}

/// Resolves `preset:<name>` or a path to a TOML experiment file.
pub fn resolve(source: &str) -> Result<ExperimentSpec> {
    match source.strip_prefix("preset:") {
        Some(name) => preset(name),
        None => ExperimentSpec::load(Path::new(source)).map_err(|e| match e {
            Error::Io(io) => Error::config(format!("cannot read config {source}: {io}")),
            other => other,
        }),
    }
}
