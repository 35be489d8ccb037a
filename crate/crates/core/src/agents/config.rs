use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::Schedule;

pub const DEFAULT_EPISODES: u64 = 20_000;

/// Accumulation used to key the Q table of the stochastic-state agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MossKey {
    /// The reward actually accumulated so far in the episode.
    #[default]
    Actual,
    /// The smoothed per-state estimate P(s) kept in the global statistics.
    Smoothed,
}

/// Hyper-parameters shared by every learning agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub alpha: Schedule,
    pub gamma: f64,
    pub lambda: f64,
    pub temperature: Schedule,
    pub episodes: u64,
    /// Lower bound on the visit-probability weighting of two-phase MOSS.
    pub epsilon: f64,
    /// Data-gathering phase length of two-phase MOSS, in episodes.
    pub data_phase: u64,
    /// Learning phase length of two-phase MOSS, in episodes.
    pub learning_phase: u64,
    /// Cell width used to quantize accumulated rewards into table keys.
    pub grid: f64,
    /// Initial value of every Q component.
    pub q_init: f64,
    /// Table key of the stochastic-state agents.
    #[serde(default)]
    pub moss_key: MossKey,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            alpha: Schedule::constant(0.01),
            gamma: 1.0,
            lambda: 0.95,
            temperature: Schedule::linear(10.0, 2.0, DEFAULT_EPISODES),
            episodes: DEFAULT_EPISODES,
            epsilon: 0.05,
            data_phase: 500,
            learning_phase: 1500,
            grid: 0.1,
            q_init: 0.0,
            moss_key: MossKey::Actual,
        }
    }
}

impl AgentConfig {
    /// Learning rate decaying linearly from 0.01 to 0.0001 over the run.
    pub fn decayed_alpha(episodes: u64) -> Schedule {
        Schedule::linear(0.01, 0.0001, episodes)
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.temperature.validate()?;
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("gamma", self.gamma)?;
        unit("lambda", self.lambda)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(format!(
                "epsilon = {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.data_phase == 0 || self.learning_phase == 0 {
            return Err(Error::config(
                "data and learning phases need at least one episode each",
            ));
        }
        if !(self.grid > 0.0 && self.grid.is_finite()) {
            return Err(Error::config(format!(
                "grid = {} must be positive",
                self.grid
            )));
        }
        if self.episodes == 0 {
            return Err(Error::config("episode budget must be positive"));
        }
        if !self.q_init.is_finite() {
            return Err(Error::config("q_init must be finite"));
        }
        let (t0, t1) = match self.temperature {
            Schedule::Constant { value } => (value, value),
            Schedule::LinearDecay { initial, last, .. } => (initial, last),
        };
        if !(t0 > 0.0 && t1 > 0.0) {
            return Err(Error::config("temperature must stay positive"));
        }
        Ok(())
    }
}
