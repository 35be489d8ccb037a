use rand::RngCore;

use super::{AgentConfig, AlgorithmId, EpisodeRecord, Probe, QTable, StepProbe};
use crate::envs::{MomdpModel, StateId};
use crate::error::{Error, Result};
use crate::label::PolicyLabel;
use crate::oracle::enumerate_policies;
use crate::reward::RewardVector;

/// A whole deterministic policy used as a single episode-long choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyOption {
    pub label: PolicyLabel,
    /// Action index per state; `None` where the option is undefined.
    pub actions: Vec<Option<usize>>,
}

impl PolicyOption {
    /// The option following `label`, defined on every non-terminal state.
    pub fn from_label(model: &MomdpModel, label: PolicyLabel) -> Result<Self> {
        let actions = model
            .policy_actions(&label)?
            .into_iter()
            .enumerate()
            .map(|(s, a)| (!model.is_terminal(StateId(s))).then_some(a))
            .collect();
        Ok(PolicyOption { label, actions })
    }

    pub fn action(&self, s: StateId) -> Option<usize> {
        self.actions.get(s.0).copied().flatten()
    }
}

/// One option per deterministic policy of `model`, in enumeration order.
pub fn all_policy_options(model: &MomdpModel) -> Result<Vec<PolicyOption>> {
    enumerate_policies(model)
        .into_iter()
        .map(|l| PolicyOption::from_label(model, l))
        .collect()
}

/// Q(λ) over policy options: one option is picked per episode from the
/// values at the initial state and followed to termination.
#[derive(Debug, Clone)]
pub struct OptionsAgent<'m> {
    model: &'m MomdpModel,
    config: AgentConfig,
    options: Vec<PolicyOption>,
    q: QTable<(StateId, usize)>,
    selections: Vec<u64>,
    probe: Probe,
}

impl<'m> OptionsAgent<'m> {
    pub fn new(
        model: &'m MomdpModel,
        options: Vec<PolicyOption>,
        config: AgentConfig,
    ) -> Result<Self> {
        config.validate()?;
        if options.is_empty() {
            return Err(Error::config("options agent needs at least one option"));
        }
        for o in &options {
            for (s, a) in o.actions.iter().enumerate() {
                if let Some(a) = *a {
                    if s >= model.states().len() || a >= model.num_actions(StateId(s)) {
                        return Err(Error::config(format!(
                            "option {} names an invalid action",
                            o.label
                        )));
                    }
                }
            }
        }
        let q = QTable::new(RewardVector::new(vec![config.q_init; model.objectives()]));
        let selections = vec![0; options.len()];
        Ok(OptionsAgent {
            model,
            config,
            options,
            q,
            selections,
            probe: Probe::default(),
        })
    }

    pub fn options(&self) -> &[PolicyOption] {
        &self.options
    }

    pub fn q(&self) -> &QTable<(StateId, usize)> {
        &self.q
    }

    /// Number of episodes in which each option was followed.
    pub fn selections(&self) -> &[u64] {
        &self.selections
    }

    /// Current Q(s, option) for every option.
    pub fn values_at(&self, s: StateId) -> Vec<RewardVector> {
        (0..self.options.len())
            .map(|p| self.q.value((s, p), 0).clone())
            .collect()
    }

    fn option_action(&self, option: usize, s: StateId) -> Result<usize> {
        self.options[option].action(s).ok_or_else(|| {
            Error::config(format!(
                "option {} is undefined at state {}",
                self.options[option].label,
                self.model.state(s).name
            ))
        })
    }
}

impl super::Agent for OptionsAgent<'_> {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::Options
    }

    fn run_episode(&mut self, episode: u64, rng: &mut dyn RngCore) -> Result<EpisodeRecord> {
        let model = self.model;
        let alpha = self.config.alpha.value_unchecked(episode);
        let temperature = self.config.temperature.value_unchecked(episode);
        let decay = self.config.gamma * self.config.lambda;

        self.q.clear_traces();
        let mut total = RewardVector::zeros(model.objectives());
        let mut s = model.reset();
        let option = model
            .utility()
            .softmax_select_unchecked(&self.values_at(s), temperature, rng);
        self.selections[option] += 1;
        loop {
            let a = self.option_action(option, s)?;
            let step = model.step_unchecked(s, a, rng);
            total += &step.reward;
            let bootstrap = if step.done {
                None
            } else {
                self.option_action(option, step.next)?;
                Some(self.q.value((step.next, option), 0).clone())
            };
            self.q.backup(
                (s, option),
                0,
                &step.reward,
                bootstrap.as_ref(),
                self.config.gamma,
                alpha,
                decay,
                true,
            );
            self.probe.record(episode, s, None, Some(option), &self.q);
            if step.done {
                break;
            }
            s = step.next;
        }
        Ok(EpisodeRecord {
            episode,
            label: super::Agent::greedy_label(self),
            episode_return: total,
            alpha,
            temperature,
            option_values: Some(self.values_at(model.initial())),
        })
    }

    fn greedy_label(&self) -> PolicyLabel {
        let best = self
            .model
            .utility()
            .greedy_unchecked(&self.values_at(self.model.initial()));
        self.options[best].label.clone()
    }

    fn set_recording(&mut self, on: bool) {
        self.probe.enabled = on;
    }

    fn step_probes(&self) -> &[StepProbe] {
        &self.probe.steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{run_options, Agent};
    use crate::envs::space_traders_original;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nine_options_for_space_traders() {
        let model = space_traders_original();
        let options = all_policy_options(&model).unwrap();
        assert_eq!(options.len(), 9);
        let labels: Vec<_> = options
            .iter()
            .map(|o| o.label.as_str().to_string())
            .collect();
        assert_eq!(
            labels,
            ["II", "ID", "IT", "DI", "DD", "DT", "TI", "TD", "TT"]
        );
        let goal = model.state_id(crate::envs::GOAL).unwrap();
        assert!(options.iter().all(|o| o.action(goal).is_none()));
    }

    #[test]
    fn greedy_label_is_the_best_option() {
        let model = space_traders_original();
        let options = all_policy_options(&model).unwrap();
        let mut agent = OptionsAgent::new(&model, options, AgentConfig::default()).unwrap();
        let a = model.initial();
        agent.q.set((a, 3), 0, RewardVector::from([0.9, -14.5]));
        for p in [0, 1, 2, 4, 5, 6, 7, 8] {
            agent.q.set((a, p), 0, RewardVector::from([0.5, -30.0]));
        }
        assert_eq!(agent.greedy_label(), "DI");
    }

    #[test]
    fn undefined_option_is_a_config_error() {
        let model = space_traders_original();
        let mut broken = PolicyOption::from_label(&model, "DI".into()).unwrap();
        broken.actions[model.state_id("B").unwrap().0] = None;
        let config = AgentConfig {
            episodes: 50,
            ..Default::default()
        };
        let err = run_options(
            &model,
            vec![broken],
            &config,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn single_option_converges_to_its_mean_return() {
        let model = space_traders_original();
        let option = PolicyOption::from_label(&model, "TT".into()).unwrap();
        let config = AgentConfig {
            episodes: 20_000,
            alpha: AgentConfig::decayed_alpha(20_000),
            ..Default::default()
        };
        let trained = run_options(
            &model,
            vec![option],
            &config,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let q = &trained.agent.values_at(model.initial())[0];
        assert!((q[0] - 0.7225).abs() < 0.03 && q[1].abs() < 1e-9, "{q}");
        assert_eq!(trained.agent.selections(), &[20_000]);
    }
}
