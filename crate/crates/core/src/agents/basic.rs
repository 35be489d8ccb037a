use rand::RngCore;

use super::{
    roll_forward, select, AgentConfig, AlgorithmId, AugmentedState, EpisodeRecord, Probe, QTable,
    StepProbe,
};
use crate::envs::MomdpModel;
use crate::error::Result;
use crate::label::PolicyLabel;
use crate::reward::RewardVector;

/// Multi-objective Q(λ) whose augmented state carries the actual reward
/// accumulated so far in the episode.
#[derive(Debug, Clone)]
pub struct BasicMoql<'m> {
    model: &'m MomdpModel,
    config: AgentConfig,
    q: QTable<AugmentedState>,
    probe: Probe,
}

impl<'m> BasicMoql<'m> {
    pub fn new(model: &'m MomdpModel, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let q = QTable::new(RewardVector::new(vec![config.q_init; model.objectives()]));
        Ok(BasicMoql {
            model,
            config,
            q,
            probe: Probe::default(),
        })
    }

    pub fn q(&self) -> &QTable<AugmentedState> {
        &self.q
    }

    /// `U = Q(s^A, ·) + P`.
    fn utilities(&self, key: &AugmentedState, accumulated: &RewardVector) -> Vec<RewardVector> {
        let mut row = self.q.row(key, self.model.num_actions(key.state));
        for u in &mut row {
            *u += accumulated;
        }
        row
    }
}

impl super::Agent for BasicMoql<'_> {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::Basic
    }

    fn run_episode(&mut self, episode: u64, rng: &mut dyn RngCore) -> Result<EpisodeRecord> {
        let model = self.model;
        let utility = model.utility();
        let alpha = self.config.alpha.value_unchecked(episode);
        let temperature = self.config.temperature.value_unchecked(episode);
        let decay = self.config.gamma * self.config.lambda;
        let grid = self.config.grid;

        self.q.clear_traces();
        let mut total = RewardVector::zeros(model.objectives());
        let mut s = model.reset();
        let mut key = AugmentedState::new(s, &total, grid);
        let (_, mut a) = select(utility, &self.utilities(&key, &total), temperature, rng);
        loop {
            let step = model.step_unchecked(s, a, rng);
            total += &step.reward;
            if step.done {
                self.q.backup(
                    key,
                    a,
                    &step.reward,
                    None,
                    self.config.gamma,
                    alpha,
                    decay,
                    true,
                );
                self.probe.record(episode, s, None, None, &self.q);
                break;
            }
            let next = AugmentedState::new(step.next, &total, grid);
            let (greedy, chosen) =
                select(utility, &self.utilities(&next, &total), temperature, rng);
            let bootstrap = self.q.value(next.clone(), greedy).clone();
            self.q.backup(
                key,
                a,
                &step.reward,
                Some(&bootstrap),
                self.config.gamma,
                alpha,
                decay,
                chosen == greedy,
            );
            self.probe
                .record(episode, s, Some(greedy), Some(chosen), &self.q);
            s = step.next;
            key = next;
            a = chosen;
        }
        Ok(EpisodeRecord {
            episode,
            label: super::Agent::greedy_label(self),
            episode_return: total,
            alpha,
            temperature,
            option_values: None,
        })
    }

    fn greedy_label(&self) -> PolicyLabel {
        let utility = self.model.utility();
        let grid = self.config.grid;
        roll_forward(
            self.model,
            |s, acc| {
                utility.greedy_unchecked(&self.utilities(&AugmentedState::new(s, acc, grid), acc))
            },
            |_, _, o, acc| *acc += o.reward_vector(),
        )
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
    use crate::agents::{run_basic_moql, Agent};
    use crate::envs::space_traders_original;
    use crate::oracle::ser_optimal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_model_learns_the_oracle_policy() {
        let model = space_traders_original().deterministic_variant();
        let best = ser_optimal(&model, model.utility()).unwrap();
        let config = AgentConfig {
            episodes: 5_000,
            ..Default::default()
        };
        for seed in 0..3 {
            let trained =
                run_basic_moql(&model, &config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(trained.agent.greedy_label(), best, "seed {seed}");
        }
    }

    #[test]
    fn lambda_zero_leaves_one_live_trace_at_most() {
        let model = space_traders_original();
        let config = AgentConfig {
            lambda: 0.0,
            episodes: 200,
            ..Default::default()
        };
        let mut agent = BasicMoql::new(&model, config).unwrap();
        agent.set_recording(true);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        crate::agents::train(&mut agent, 200, &mut rng).unwrap();
        assert!(!agent.step_probes().is_empty());
        assert!(agent.step_probes().iter().all(|p| p.live_traces == 0));
    }
}
