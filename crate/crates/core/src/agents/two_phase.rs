use rand::RngCore;

use super::moss::{arrive, frozen_greedy_label, frozen_values};
use super::{
    select, AgentConfig, AlgorithmId, AugmentedState, EpisodeRecord, GlobalStats, Probe, QTable,
    StepProbe,
};
use crate::envs::MomdpModel;
use crate::error::Result;
use crate::label::PolicyLabel;
use crate::reward::RewardVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Greedy-only episodes that rebuild the global statistics.
    DataGathering,
    /// Exploratory episodes that update Q against frozen statistics.
    Learning,
}

/// Stochastic-state Q(λ) whose statistics come only from greedy episodes.
///
/// Episodes cycle through `data_phase` statistics-gathering episodes (which
/// start from reset statistics) followed by `learning_phase` learning
/// episodes, until the episode budget runs out. Action values use a floor of
/// `epsilon` on the visit-probability weight.
#[derive(Debug, Clone)]
pub struct MossTwoPhase<'m> {
    model: &'m MomdpModel,
    config: AgentConfig,
    q: QTable<AugmentedState>,
    stats: GlobalStats,
    probe: Probe,
}

impl<'m> MossTwoPhase<'m> {
    pub fn new(model: &'m MomdpModel, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let q = QTable::new(RewardVector::new(vec![config.q_init; model.objectives()]));
        let stats = GlobalStats::new(model.states().len(), model.objectives());
        Ok(MossTwoPhase {
            model,
            config,
            q,
            stats,
            probe: Probe::default(),
        })
    }

    pub fn q(&self) -> &QTable<AugmentedState> {
        &self.q
    }

    pub fn stats(&self) -> &GlobalStats {
        &self.stats
    }

    pub fn phase_of(&self, episode: u64) -> Phase {
        if episode % (self.config.data_phase + self.config.learning_phase) < self.config.data_phase
        {
            Phase::DataGathering
        } else {
            Phase::Learning
        }
    }

    fn gather(&mut self, alpha: f64, rng: &mut dyn RngCore) -> Result<RewardVector> {
        let model = self.model;
        let utility = model.utility();
        let floor = Some(self.config.epsilon);
        self.stats.begin_episode();
        let mut total = RewardVector::zeros(model.objectives());
        let mut s = model.reset();
        let (_, u) = arrive(
            model,
            &self.q,
            &mut self.stats,
            s,
            &total,
            alpha,
            floor,
            &self.config,
        )?;
        let mut a = utility.greedy_unchecked(&u);
        loop {
            let step = model.step_unchecked(s, a, rng);
            total += &step.reward;
            if step.done {
                self.stats.record_arrival(step.next, &total, alpha);
                break;
            }
            s = step.next;
            let (_, u) = arrive(
                model,
                &self.q,
                &mut self.stats,
                s,
                &total,
                alpha,
                floor,
                &self.config,
            )?;
            a = utility.greedy_unchecked(&u);
        }
        self.stats.end_episode(&total, alpha);
        Ok(total)
    }

    fn learn(
        &mut self,
        episode: u64,
        alpha: f64,
        temperature: f64,
        rng: &mut dyn RngCore,
    ) -> RewardVector {
        let model = self.model;
        let utility = model.utility();
        let floor = Some(self.config.epsilon);
        let decay = self.config.gamma * self.config.lambda;
        self.q.clear_traces();
        let mut total = RewardVector::zeros(model.objectives());
        let mut s = model.reset();
        let (mut key, u) =
            frozen_values(model, &self.q, &self.stats, s, &total, floor, &self.config);
        let (_, mut a) = select(utility, &u, temperature, rng);
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
            let (next, u) = frozen_values(
                model,
                &self.q,
                &self.stats,
                step.next,
                &total,
                floor,
                &self.config,
            );
            let (greedy, chosen) = select(utility, &u, temperature, rng);
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
        total
    }
}

impl super::Agent for MossTwoPhase<'_> {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::MossTwoPhase
    }

    fn run_episode(&mut self, episode: u64, rng: &mut dyn RngCore) -> Result<EpisodeRecord> {
        let alpha = self.config.alpha.value_unchecked(episode);
        let temperature = self.config.temperature.value_unchecked(episode);
        let total = match self.phase_of(episode) {
            Phase::DataGathering => {
                if episode.is_multiple_of(self.config.data_phase + self.config.learning_phase) {
                    self.stats.restart_counts();
                }
                self.gather(alpha, rng)?
            }
            Phase::Learning => self.learn(episode, alpha, temperature, rng),
        };
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
        frozen_greedy_label(
            self.model,
            &self.q,
            &self.stats,
            Some(self.config.epsilon),
            &self.config,
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
    use crate::agents::{train, Agent};
    use crate::envs::space_traders_original;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config() -> AgentConfig {
        AgentConfig {
            data_phase: 5,
            learning_phase: 10,
            episodes: 45,
            ..Default::default()
        }
    }

    #[test]
    fn phases_cycle() {
        let model = space_traders_original();
        let agent = MossTwoPhase::new(&model, config()).unwrap();
        let phases: Vec<_> = (0..30).map(|e| agent.phase_of(e)).collect();
        assert!(phases[..5].iter().all(|p| *p == Phase::DataGathering));
        assert!(phases[5..15].iter().all(|p| *p == Phase::Learning));
        assert_eq!(phases[15], Phase::DataGathering);
    }

    #[test]
    fn statistics_reset_each_cycle_and_freeze_while_learning() {
        let model = space_traders_original();
        let mut agent = MossTwoPhase::new(&model, config()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        train(&mut agent, 5, &mut rng).unwrap();
        assert_eq!(agent.stats().episodes, 5);
        let frozen = agent.stats().clone();
        assert!(agent.q().is_empty());
        for e in 5..15 {
            agent.run_episode(e, &mut rng).unwrap();
        }
        assert_eq!(agent.stats(), &frozen);
        assert!(!agent.q().is_empty());
        agent.run_episode(15, &mut rng).unwrap();
        assert_eq!(agent.stats().episodes, 1);
    }

    #[test]
    fn zero_length_phases_are_rejected() {
        let model = space_traders_original();
        let bad = AgentConfig {
            data_phase: 0,
            ..Default::default()
        };
        assert!(matches!(
            MossTwoPhase::new(&model, bad),
            Err(crate::Error::InvalidConfig(_))
        ));
    }
}
