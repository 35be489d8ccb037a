use rust_decimal::Decimal;
use rust_decimal_macros::dec;
use serde::{Deserialize, Serialize};

use super::file::{ActionEntry, ModelFile, OutcomeEntry, StateEntry};
use super::space_traders::FAIL;
use crate::error::{Error, Result};

/// One hop of a chained route. A failed hop ends the episode in the
/// failure terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainLeg {
    pub action: String,
    pub success_probability: Decimal,
    pub success_reward: Vec<Decimal>,
    pub failure_reward: Vec<Decimal>,
    /// Replace the first objective of `failure_reward` with the -1 terminal
    /// penalty of the reward-design variant.
    #[serde(default)]
    pub failure_penalty: bool,
}

/// Route from a source state to a destination through fresh intermediate
/// states named `C`, `C2`, `C3`, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub legs: Vec<ChainLeg>,
}

impl Default for ChainSpec {
    /// A --Direct--> C is certain at time cost 1; C --Continue--> B succeeds
    /// with probability 0.9 at time cost 5, and its failure carries no
    /// success-objective penalty. Route success is 0.9, the successful route
    /// costs 6 time units, and the expected success-objective reward
    /// accumulated on arrival at B is zero.
    fn default() -> Self {
        ChainSpec {
            legs: vec![
                ChainLeg {
                    action: "Direct".into(),
                    success_probability: dec!(1),
                    success_reward: vec![dec!(0), dec!(-1)],
                    failure_reward: vec![dec!(0), dec!(0)],
                    failure_penalty: false,
                },
                ChainLeg {
                    action: "Continue".into(),
                    success_probability: dec!(0.9),
                    success_reward: vec![dec!(0), dec!(-5)],
                    failure_reward: vec![dec!(0), dec!(-1)],
                    failure_penalty: false,
                },
            ],
        }
    }
}

impl ChainSpec {
    pub fn validate(&self, objectives: usize) -> Result<()> {
        if self.legs.is_empty() {
            return Err(Error::config("chain needs at least one leg"));
        }
        for (i, leg) in self.legs.iter().enumerate() {
            if leg.action.is_empty() {
                return Err(Error::config(format!("chain leg {i} has no action name")));
            }
            if leg.success_probability <= Decimal::ZERO || leg.success_probability > Decimal::ONE {
                return Err(Error::config(format!(
                    "chain leg {i} success probability {} outside (0, 1]",
                    leg.success_probability
                )));
            }
            if leg.success_reward.len() != objectives || leg.failure_reward.len() != objectives {
                return Err(Error::config(format!(
                    "chain leg {i} rewards must have {objectives} components"
                )));
            }
        }
        Ok(())
    }

    /// Probability that the whole route succeeds.
    pub fn route_success(&self) -> Decimal {
        self.legs.iter().map(|l| l.success_probability).product()
    }

    fn intermediate_name(i: usize) -> String {
        if i == 1 {
            "C".to_owned()
        } else {
            format!("C{i}")
        }
    }

    /// Replaces action `action` of state `from` in `file` with this chain
    /// ending at `to`. Intermediate states are inserted after `to`.
    pub fn apply(
        &self,
        mut file: ModelFile,
        from: &str,
        action: &str,
        to: &str,
    ) -> Result<ModelFile> {
        self.validate(file.objectives)?;
        let leg_action = |i: usize, leg: &ChainLeg| {
            let next = if i + 1 == self.legs.len() {
                to.to_owned()
            } else {
                Self::intermediate_name(i + 1)
            };
            let mut outcomes = vec![OutcomeEntry::new(
                leg.success_probability,
                &next,
                leg.success_reward.clone(),
            )];
            if leg.success_probability < Decimal::ONE {
                let mut failure = leg.failure_reward.clone();
                if leg.failure_penalty {
                    failure[0] = dec!(-1);
                }
                outcomes.push(OutcomeEntry::new(
                    Decimal::ONE - leg.success_probability,
                    FAIL,
                    failure,
                ));
            }
            ActionEntry {
                name: leg.action.clone(),
                letter: None,
                outcomes,
            }
        };

        let source = file
            .states
            .iter_mut()
            .find(|s| s.name == from)
            .ok_or_else(|| Error::config(format!("chain source state {from:?} not found")))?;
        let slot = source
            .actions
            .iter()
            .position(|a| a.name == action)
            .ok_or_else(|| Error::config(format!("chain replaces unknown action {action:?}")))?;
        let mut first = leg_action(0, &self.legs[0]);
        first.letter = source.actions[slot].letter;
        source.actions[slot] = first;

        let insert_at = file
            .states
            .iter()
            .position(|s| s.name == to)
            .ok_or_else(|| Error::config(format!("chain destination {to:?} not found")))?
            + 1;
        let intermediates: Vec<StateEntry> = self.legs[1..]
            .iter()
            .enumerate()
            .map(|(j, leg)| {
                StateEntry::decision(
                    &Self::intermediate_name(j + 1),
                    vec![leg_action(j + 1, leg)],
                )
            })
            .collect();
        file.states.splice(insert_at..insert_at, intermediates);
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{space_traders_extra_state, space_traders_reward_design};

    #[test]
    fn one_leg_chain_is_the_reward_design_model() {
        let spec = ChainSpec {
            legs: vec![ChainLeg {
                action: "Direct".into(),
                success_probability: dec!(0.9),
                success_reward: vec![dec!(0), dec!(-6)],
                failure_reward: vec![dec!(0), dec!(-1)],
                failure_penalty: true,
            }],
        };
        assert_eq!(
            space_traders_extra_state(&spec).unwrap(),
            space_traders_reward_design()
        );
    }

    #[test]
    fn default_chain_shape() {
        let spec = ChainSpec::default();
        assert_eq!(spec.route_success(), dec!(0.9));
        let m = space_traders_extra_state(&spec).unwrap();
        let names: Vec<_> = m.states().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["A", "B", "C", "goal", "fail"]);
        // C offers a single action, so labels stay two letters long.
        assert_eq!(m.decision_states().len(), 2);
        assert_eq!(m.horizon(), 3);
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        let mut spec = ChainSpec::default();
        spec.legs[1].success_probability = dec!(0);
        assert!(matches!(
            space_traders_extra_state(&spec),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            space_traders_extra_state(&ChainSpec { legs: vec![] }),
            Err(Error::InvalidConfig(_))
        ));
        let mut spec = ChainSpec::default();
        spec.legs[0].success_reward = vec![dec!(0)];
        assert!(matches!(
            space_traders_extra_state(&spec),
            Err(Error::InvalidConfig(_))
        ));
    }
}
