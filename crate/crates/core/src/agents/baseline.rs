use rand::RngCore;

use super::{
    roll_forward, select, AgentConfig, AlgorithmId, AugmentedState, EpisodeRecord,
    ImmediateRewards, Probe, QTable, StepProbe,
};
use crate::envs::MomdpModel;
use crate::error::Result;
use crate::label::PolicyLabel;
use crate::reward::RewardVector;

/// Multi-objective Q(λ) whose augmented state carries the sum of the
/// estimated mean immediate rewards of the actions taken so far.
#[derive(Debug, Clone)]
pub struct BaselineExpected<'m> {
    model: &'m MomdpModel,
    config: AgentConfig,
    q: QTable<AugmentedState>,
    immediate: ImmediateRewards,
    probe: Probe,
}

impl<'m> BaselineExpected<'m> {
    pub fn new(model: &'m MomdpModel, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let q = QTable::new(RewardVector::new(vec![config.q_init; model.objectives()]));
        Ok(BaselineExpected {
            model,
            config,
            q,
            immediate: ImmediateRewards::new(model.objectives()),
            probe: Probe::default(),
        })
    }

    pub fn q(&self) -> &QTable<AugmentedState> {
        &self.q
    }

    pub fn immediate(&self) -> &ImmediateRewards {
        &self.immediate
    }

    pub fn q_mut(&mut self) -> &mut QTable<AugmentedState> {
        &mut self.q
    }

    pub fn immediate_mut(&mut self) -> &mut ImmediateRewards {
        &mut self.immediate
    }

    fn utilities(&self, key: &AugmentedState, accumulated: &RewardVector) -> Vec<RewardVector> {
        let mut row = self.q.row(key, self.model.num_actions(key.state));
        for u in &mut row {
            *u += accumulated;
        }
        row
    }
}

impl super::Agent for BaselineExpected<'_> {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::BaselineExpected
    }

    fn run_episode(&mut self, episode: u64, rng: &mut dyn RngCore) -> Result<EpisodeRecord> {
        let model = self.model;
        let utility = model.utility();
        let alpha = self.config.alpha.value_unchecked(episode);
        let temperature = self.config.temperature.value_unchecked(episode);
        let decay = self.config.gamma * self.config.lambda;
        let grid = self.config.grid;

        self.q.clear_traces();
        let mut expected = RewardVector::zeros(model.objectives());
        let mut total = RewardVector::zeros(model.objectives());
        let mut s = model.reset();
        let mut key = AugmentedState::new(s, &expected, grid);
        let (_, mut a) = select(utility, &self.utilities(&key, &expected), temperature, rng);
        loop {
            let step = model.step_unchecked(s, a, rng);
            total += &step.reward;
            self.immediate.observe(s, a, &step.reward);
            expected += &self.immediate.mean(s, a);
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
            let next = AugmentedState::new(step.next, &expected, grid);
            let (greedy, chosen) =
                select(utility, &self.utilities(&next, &expected), temperature, rng);
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
            |s, a, _, acc| *acc += &self.immediate.mean(s, a),
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
    use crate::agents::{run_baseline_expected, Agent};
    use crate::envs::space_traders_original;
    use crate::oracle::evaluate_policy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rust_decimal::prelude::ToPrimitive;

    fn to_f64(v: &[rust_decimal::Decimal]) -> RewardVector {
        RewardVector::new(v.iter().map(|x| x.to_f64().unwrap()).collect())
    }

    #[test]
    fn immediate_estimate_converges_to_table_means() {
        let model = space_traders_original();
        let a = model.state_id("A").unwrap();
        let direct = 1;
        let mut agent = BaselineExpected::new(&model, AgentConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        while agent.immediate().visits(a, direct) < 10_000 {
            let step = model.step(a, direct, &mut rng).unwrap();
            agent.immediate_mut().observe(a, direct, &step.reward);
        }
        let mean = agent.immediate().mean(a, direct);
        assert!(
            mean[0].abs() <= 0.01 && (mean[1] + 5.5).abs() <= 0.05,
            "{mean}"
        );
    }

    #[test]
    fn exact_table_values_make_id_greedy() {
        // Q at each state is the mean return-to-go of the action followed by
        // the greedy continuation; I holds the exact mean immediate rewards.
        let model = space_traders_original();
        let grid = 0.1;
        let mut agent = BaselineExpected::new(&model, AgentConfig::default()).unwrap();
        let a = model.state_id("A").unwrap();
        let b = model.state_id("B").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in [a, b] {
            for act in 0..3 {
                for _ in 0..20_000 {
                    let step = model.step(s, act, &mut rng).unwrap();
                    agent.immediate_mut().observe(s, act, &step.reward);
                }
            }
        }
        for act_a in 0..3 {
            let p = agent.immediate().mean(a, act_a);
            let key = AugmentedState::new(b, &p, grid);
            for act_b in 0..3 {
                let q = to_f64(&model.mean_reward(b, act_b));
                agent.q_mut().set(key.clone(), act_b, q);
            }
        }
        // At B the greedy continuation from every accumulation is Direct.
        let direct_b = evaluate_policy(&model, &"ID".into()).unwrap();
        let start = AugmentedState::new(a, &RewardVector::zeros(2), grid);
        for act_a in 0..3 {
            let label =
                crate::label::PolicyLabel::from_letters([model.action(a, act_a).letter, 'D']);
            let q = to_f64(&evaluate_policy(&model, &label).unwrap().mean_return);
            agent.q_mut().set(start.clone(), act_a, q);
        }
        assert_eq!(direct_b.label, "ID");
        assert_eq!(agent.greedy_label(), "ID");
    }

    #[test]
    fn watkins_cut_clears_traces_after_exploration() {
        let model = space_traders_original();
        let config = AgentConfig {
            episodes: 500,
            ..Default::default()
        };
        let mut agent = BaselineExpected::new(&model, config).unwrap();
        agent.set_recording(true);
        crate::agents::train(&mut agent, 500, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let explored: Vec<_> = agent
            .step_probes()
            .iter()
            .filter(|p| p.chosen != p.greedy)
            .collect();
        assert!(!explored.is_empty());
        assert!(explored.iter().all(|p| p.live_traces == 0));
        let trained = run_baseline_expected(
            &model,
            &AgentConfig {
                episodes: 50,
                ..Default::default()
            },
            &mut ChaCha8Rng::seed_from_u64(2),
        );
        assert_eq!(trained.unwrap().log.len(), 50);
    }
}
