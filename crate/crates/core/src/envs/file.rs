//! Declarative TOML description of a [`MomdpModel`].
//!
//! ```toml
//! objectives = 2
//! initial = "A"
//! discount = "1"
//! thresholds = ["0.88"]
//!
//! [[states]]
//! name = "A"
//!
//! [[states.actions]]
//! name = "Direct"
//! letter = "D"
//! outcomes = [
//!     { probability = "0.9", next = "B", reward = ["0", "-6"] },
//!     { probability = "0.1", next = "fail", reward = ["0", "-1"] },
//! ]
//!
//! [[states]]
//! name = "fail"
//! terminal = "failure"
//! ```
//!
//! Decimals are written as strings so that probabilities and rewards are
//! read without binary rounding.

use std::path::Path;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::model::{ActionDef, MomdpModel, Outcome, StateDef, StateId, StateKind};
use crate::error::{Error, Result};
use crate::tlo::TloUtility;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub objectives: usize,
    pub initial: String,
    #[serde(default = "one")]
    pub discount: Decimal,
    pub thresholds: Vec<Decimal>,
    pub states: Vec<StateEntry>,
}

fn one() -> Decimal {
    Decimal::ONE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalKind {
    Goal,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<TerminalKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<ActionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub name: String,
    /// Defaults to the first character of `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub letter: Option<char>,
    pub outcomes: Vec<OutcomeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeEntry {
    pub probability: Decimal,
    pub next: String,
    pub reward: Vec<Decimal>,
}

impl StateEntry {
    pub fn decision(name: &str, actions: Vec<ActionEntry>) -> Self {
        StateEntry {
            name: name.to_owned(),
            terminal: None,
            actions,
        }
    }

    pub fn terminal(name: &str, kind: TerminalKind) -> Self {
        StateEntry {
            name: name.to_owned(),
            terminal: Some(kind),
            actions: Vec::new(),
        }
    }
}

impl OutcomeEntry {
    pub fn new(probability: Decimal, next: &str, reward: Vec<Decimal>) -> Self {
        OutcomeEntry {
            probability,
            next: next.to_owned(),
            reward,
        }
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model file serializes")
    }

    pub fn into_model(self) -> Result<MomdpModel> {
        let lookup = |name: &str| -> Result<StateId> {
            self.states
                .iter()
                .position(|s| s.name == name)
                .map(StateId)
                .ok_or_else(|| Error::config(format!("unknown state {name:?}")))
        };
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::config(format!("duplicate state {:?}", s.name)));
            }
        }
        let initial = lookup(&self.initial)?;
        let mut states = Vec::with_capacity(self.states.len());
        for s in &self.states {
            let kind = match s.terminal {
                None => StateKind::NonTerminal,
                Some(TerminalKind::Goal) => StateKind::Goal,
                Some(TerminalKind::Failure) => StateKind::Failure,
            };
            let mut actions = Vec::with_capacity(s.actions.len());
            for a in &s.actions {
                let letter = match a.letter.or_else(|| a.name.chars().next()) {
                    Some(c) => c,
                    None => {
                        return Err(Error::config(format!(
                            "action in {} has an empty name",
                            s.name
                        )))
                    }
                };
                let outcomes = a
                    .outcomes
                    .iter()
                    .map(|o| {
                        Ok(Outcome::new(
                            o.probability,
                            lookup(&o.next)?,
                            o.reward.clone(),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                actions.push(ActionDef {
                    name: a.name.clone(),
                    letter,
                    outcomes,
                });
            }
            states.push(StateDef {
                name: s.name.clone(),
                kind,
                actions,
            });
        }
        MomdpModel::new(
            states,
            initial,
            self.objectives,
            self.discount,
            TloUtility::new(self.thresholds),
        )
    }

    pub fn from_model(model: &MomdpModel) -> Self {
        let name = |id: StateId| model.state(id).name.clone();
        ModelFile {
            objectives: model.objectives(),
            initial: name(model.initial()),
            discount: model.discount(),
            thresholds: model.utility().thresholds().to_vec(),
            states: model
                .states()
                .iter()
                .map(|s| StateEntry {
                    name: s.name.clone(),
                    terminal: match s.kind {
                        StateKind::NonTerminal => None,
                        StateKind::Goal => Some(TerminalKind::Goal),
                        StateKind::Failure => Some(TerminalKind::Failure),
                    },
                    actions: s
                        .actions
                        .iter()
                        .map(|a| ActionEntry {
                            name: a.name.clone(),
                            letter: Some(a.letter),
                            outcomes: a
                                .outcomes
                                .iter()
                                .map(|o| OutcomeEntry {
                                    probability: o.probability,
                                    next: name(o.next),
                                    reward: o.reward.clone(),
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl MomdpModel {
    pub fn to_toml(&self) -> String {
        ModelFile::from_model(self).to_toml()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        ModelFile::parse(text)?.into_model()
    }
}
