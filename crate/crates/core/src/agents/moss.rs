use rand::RngCore;

use super::{
    roll_forward, select, update_statistics, AgentConfig, AlgorithmId, AugmentedState,
    EpisodeRecord, GlobalStats, MossKey, Probe, QTable, StepProbe,
};
use crate::envs::{MomdpModel, StateId};
use crate::error::{Error, Result};
use crate::label::PolicyLabel;
use crate::reward::RewardVector;

/// Stochastic-state Q(λ): action values at a state are blended with the
/// estimated return of episodes that never reach it, so selection targets
/// the mean return over all episodes.
///
/// The Q table is keyed as selected by [`AgentConfig::moss_key`].
#[derive(Debug, Clone)]
pub struct MossSingle<'m> {
    model: &'m MomdpModel,
    config: AgentConfig,
    q: QTable<AugmentedState>,
    stats: GlobalStats,
    probe: Probe,
}

impl<'m> MossSingle<'m> {
    pub fn new(model: &'m MomdpModel, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let q = QTable::new(RewardVector::new(vec![config.q_init; model.objectives()]));
        let stats = GlobalStats::new(model.states().len(), model.objectives());
        Ok(MossSingle {
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
}

fn table_key(
    stats: &GlobalStats,
    s: StateId,
    accumulated: &RewardVector,
    config: &AgentConfig,
) -> AugmentedState {
    match config.moss_key {
        MossKey::Actual => AugmentedState::new(s, accumulated, config.grid),
        MossKey::Smoothed => stats.augmented(s, config.grid),
    }
}

/// Records an arrival at `s` and returns the table key and holistic action
/// values there.
#[allow(clippy::too_many_arguments)]
pub(crate) fn arrive(
    model: &MomdpModel,
    q: &QTable<AugmentedState>,
    stats: &mut GlobalStats,
    s: StateId,
    accumulated: &RewardVector,
    alpha: f64,
    floor: Option<f64>,
    config: &AgentConfig,
) -> Result<(AugmentedState, Vec<RewardVector>)> {
    let actions = model.num_actions(s);
    match config.moss_key {
        MossKey::Smoothed => {
            update_statistics(stats, q, s, actions, accumulated, alpha, floor, config.grid)
        }
        MossKey::Actual => {
            if stats.episodes == 0 {
                return Err(Error::InvalidCall(
                    "state arrival before any episode start".into(),
                ));
            }
            stats.record_arrival(s, accumulated, alpha);
            let key = table_key(stats, s, accumulated, config);
            let u = stats.holistic_values(s, &q.row(&key, actions), floor)?;
            Ok((key, u))
        }
    }
}

/// Holistic action values at `s` from frozen statistics. Before any episode
/// the local values `P(s) + Q` are used.
pub(crate) fn frozen_values(
    model: &MomdpModel,
    q: &QTable<AugmentedState>,
    stats: &GlobalStats,
    s: StateId,
    accumulated: &RewardVector,
    floor: Option<f64>,
    config: &AgentConfig,
) -> (AugmentedState, Vec<RewardVector>) {
    let key = table_key(stats, s, accumulated, config);
    let row = q.row(&key, model.num_actions(s));
    let values = match stats.holistic_values(s, &row, floor) {
        Ok(u) => u,
        Err(_) => row
            .iter()
            .map(|qa| qa + &stats.state(s).accumulated)
            .collect(),
    };
    (key, values)
}

pub(crate) fn frozen_greedy_label(
    model: &MomdpModel,
    q: &QTable<AugmentedState>,
    stats: &GlobalStats,
    floor: Option<f64>,
    config: &AgentConfig,
) -> PolicyLabel {
    let utility = model.utility();
    roll_forward(
        model,
        |s, acc| utility.greedy_unchecked(&frozen_values(model, q, stats, s, acc, floor, config).1),
        |_, _, o, acc| *acc += o.reward_vector(),
    )
}

impl super::Agent for MossSingle<'_> {
    fn algorithm(&self) -> AlgorithmId {
        AlgorithmId::Moss
    }

    fn run_episode(&mut self, episode: u64, rng: &mut dyn RngCore) -> Result<EpisodeRecord> {
        let model = self.model;
        let utility = model.utility();
        let alpha = self.config.alpha.value_unchecked(episode);
        let temperature = self.config.temperature.value_unchecked(episode);
        let decay = self.config.gamma * self.config.lambda;

        self.stats.begin_episode();
        self.q.clear_traces();
        let mut total = RewardVector::zeros(model.objectives());
        let mut s = model.reset();
        let (mut key, u) = arrive(
            model,
            &self.q,
            &mut self.stats,
            s,
            &total,
            alpha,
            None,
            &self.config,
        )?;
        let (_, mut a) = select(utility, &u, temperature, rng);
        loop {
            let step = model.step_unchecked(s, a, rng);
            total += &step.reward;
            if step.done {
                self.stats.record_arrival(step.next, &total, alpha);
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
            let (next, u) = arrive(
                model,
                &self.q,
                &mut self.stats,
                step.next,
                &total,
                alpha,
                None,
                &self.config,
            )?;
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
        self.stats.end_episode(&total, alpha);
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
        frozen_greedy_label(self.model, &self.q, &self.stats, None, &self.config)
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
    use crate::agents::{run_moss_single, Agent};
    use crate::envs::space_traders_original;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn statistics_stay_consistent_during_training() {
        let model = space_traders_original();
        let config = AgentConfig {
            episodes: 2_000,
            ..Default::default()
        };
        let trained = run_moss_single(&model, &config, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let stats = trained.agent.stats();
        assert_eq!(stats.episodes, 2_000);
        let a = model.state_id("A").unwrap();
        assert_eq!(stats.state(a).visits, 2_000);
        for st in &stats.states {
            assert!(st.visits <= stats.episodes);
        }
        let b = model.state_id("B").unwrap();
        let p = stats.visit_probability(b).unwrap();
        assert!(p > 0.5 && p < 1.0, "{p}");
    }

    #[test]
    fn key_mode_selects_the_accumulation() {
        let model = space_traders_original();
        let b = model.state_id("B").unwrap();
        let b_keys = |key: MossKey| {
            let config = AgentConfig {
                episodes: 300,
                moss_key: key,
                ..Default::default()
            };
            let trained =
                run_moss_single(&model, &config, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
            trained
                .agent
                .q()
                .entries()
                .filter(|((k, _), _)| k.state == b)
                .map(|((k, _), _)| k.key.clone())
                .collect::<Vec<_>>()
        };
        // Actual accumulations on arrival at B are whole time units.
        let actual = b_keys(MossKey::Actual);
        assert!(!actual.is_empty());
        assert!(actual.iter().all(|k| k[1] % 10 == 0), "{actual:?}");
        // The smoothed estimate drifts between them.
        let smoothed = b_keys(MossKey::Smoothed);
        assert!(smoothed.iter().any(|k| k[1] % 10 != 0), "{smoothed:?}");
    }

    #[test]
    fn traces_stay_in_unit_interval() {
        let model = space_traders_original();
        let mut agent = MossSingle::new(&model, AgentConfig::default()).unwrap();
        agent.set_recording(true);
        crate::agents::train(&mut agent, 1_000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert!(agent
            .step_probes()
            .iter()
            .all(|p| p.min_trace >= 0.0 && p.max_trace <= 1.0));
    }
}
