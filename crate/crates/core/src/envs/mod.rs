//! Finite-horizon MOMDP models and the Space Traders environments.

mod chain;
mod file;
mod model;
mod space_traders;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use chain::{ChainLeg, ChainSpec};
pub use file::{ActionEntry, ModelFile, OutcomeEntry, StateEntry, TerminalKind};
pub use model::{ActionDef, EpisodeStep, MomdpModel, Outcome, StateDef, StateId, StateKind};
pub use space_traders::{
    space_traders_extra_state, space_traders_original, space_traders_reward_design,
    space_traders_swapped, FAIL, GOAL,
};

use crate::error::{Error, Result};

/// The built-in environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvId {
    Original,
    RewardDesign,
    ExtraState,
    Swapped,
}

impl EnvId {
    pub const ALL: [EnvId; 4] = [
        EnvId::Original,
        EnvId::RewardDesign,
        EnvId::ExtraState,
        EnvId::Swapped,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EnvId::Original => "original",
            EnvId::RewardDesign => "reward-design",
            EnvId::ExtraState => "extra-state",
            EnvId::Swapped => "swapped",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            EnvId::Original => "Space Traders, success threshold 0.88",
            EnvId::RewardDesign => "failures cost -1 on the success objective, threshold 0.76",
            EnvId::ExtraState => "reward design with Direct from A routed through state C",
            EnvId::Swapped => "time penalties of planets A and B exchanged, threshold 0.88",
        }
    }

    /// Builds the model; `chain` only affects [`EnvId::ExtraState`].
    pub fn build(&self, chain: Option<&ChainSpec>) -> Result<MomdpModel> {
        Ok(match self {
            EnvId::Original => space_traders_original(),
            EnvId::RewardDesign => space_traders_reward_design(),
            EnvId::ExtraState => space_traders_extra_state(chain.unwrap_or(&ChainSpec::default()))?,
            EnvId::Swapped => space_traders_swapped(),
        })
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown environment {s:?}")))
    }
}

pub fn reset(model: &MomdpModel) -> StateId {
    model.reset()
}

pub fn step<R: rand::Rng + ?Sized>(
    model: &MomdpModel,
    s: StateId,
    a: usize,
    rng: &mut R,
) -> Result<EpisodeStep> {
    model.step(s, a, rng)
}
