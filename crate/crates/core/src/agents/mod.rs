//! Learning agents over [`MomdpModel`]s.
//!
//! Every agent exposes the same episode-at-a-time interface ([`Agent`]) so
//! the harness can drive them uniformly. The `run_*` functions train a fresh
//! agent for the configured episode budget and return it with its log.

mod baseline;
mod basic;
mod config;
mod moss;
mod options;
mod stats;
mod table;
mod two_phase;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use baseline::BaselineExpected;
pub use basic::BasicMoql;
pub use config::{AgentConfig, MossKey, DEFAULT_EPISODES};
pub use moss::MossSingle;
pub use options::{all_policy_options, OptionsAgent, PolicyOption};
pub use stats::{update_statistics, GlobalStats, StateStats};
pub use table::{AugmentedState, ImmediateRewards, QTable};
pub use two_phase::{MossTwoPhase, Phase};

use crate::envs::{MomdpModel, Outcome, StateId};
use crate::error::{Error, Result};
use crate::label::PolicyLabel;
use crate::reward::RewardVector;
use crate::tlo::TloUtility;

/// One line of an agent's training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u64,
    /// Greedy policy after the episode's final update.
    pub label: PolicyLabel,
    /// Undiscounted sum of the rewards received.
    pub episode_return: RewardVector,
    pub alpha: f64,
    pub temperature: f64,
    /// Q(initial, option) for every option, options agent only.
    pub option_values: Option<Vec<RewardVector>>,
}

/// Diagnostic snapshot taken after each learning step when recording is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepProbe {
    pub episode: u64,
    pub state: StateId,
    /// Greedy action in the successor state, if it is non-terminal.
    pub greedy: Option<usize>,
    /// Action actually selected in the successor state.
    pub chosen: Option<usize>,
    pub max_trace: f64,
    pub min_trace: f64,
    /// Non-zero traces left after the update.
    pub live_traces: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Probe {
    enabled: bool,
    steps: Vec<StepProbe>,
}

impl Probe {
    pub(crate) fn record<K: Eq + std::hash::Hash + Clone>(
        &mut self,
        episode: u64,
        state: StateId,
        greedy: Option<usize>,
        chosen: Option<usize>,
        q: &QTable<K>,
    ) {
        if !self.enabled {
            return;
        }
        let (mut max, mut min) = (0.0f64, 0.0f64);
        for (_, e) in q.traces() {
            max = max.max(*e);
            min = min.min(*e);
        }
        self.steps.push(StepProbe {
            episode,
            state,
            greedy,
            chosen,
            max_trace: max,
            min_trace: min,
            live_traces: q.live_traces(),
        });
    }
}

/// An agent trained one episode at a time.
pub trait Agent {
    fn algorithm(&self) -> AlgorithmId;

    /// Runs episode `episode` (0-based) with the schedules evaluated at that
    /// index, then samples the greedy policy.
    fn run_episode(&mut self, episode: u64, rng: &mut dyn RngCore) -> Result<EpisodeRecord>;

    /// Current greedy policy, rolled forward from the initial state.
    fn greedy_label(&self) -> PolicyLabel;

    /// Turns per-step trace probes on or off.
    fn set_recording(&mut self, on: bool);

    fn step_probes(&self) -> &[StepProbe];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    /// Q(λ) keyed on the actual accumulated reward.
    Basic,
    /// Q(λ) keyed on the accumulated expected immediate reward.
    BaselineExpected,
    /// Single-phase stochastic-state Q(λ) with global statistics.
    Moss,
    /// Alternating statistics-gathering and learning phases.
    MossTwoPhase,
    /// Q(λ) over whole-episode policy options.
    Options,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::Basic,
        AlgorithmId::BaselineExpected,
        AlgorithmId::Moss,
        AlgorithmId::MossTwoPhase,
        AlgorithmId::Options,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmId::Basic => "basic",
            AlgorithmId::BaselineExpected => "baseline-expected",
            AlgorithmId::Moss => "moss",
            AlgorithmId::MossTwoPhase => "moss-two-phase",
            AlgorithmId::Options => "options",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            AlgorithmId::Basic => {
                "multi-objective Q(lambda) conditioned on actual accumulated reward"
            }
            AlgorithmId::BaselineExpected => {
                "multi-objective Q(lambda) conditioned on accumulated expected reward"
            }
            AlgorithmId::Moss => "stochastic-state Q(lambda) with global episode statistics",
            AlgorithmId::MossTwoPhase => {
                "stochastic-state Q(lambda) with greedy data-gathering phases"
            }
            AlgorithmId::Options => "Q(lambda) over pre-defined whole-policy options",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = AlgorithmId::ALL.iter().map(|a| a.as_str()).collect();
                Error::config(format!(
                    "unknown algorithm {s:?} (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

/// Builds a fresh agent. Options agents get every deterministic policy of
/// the model as an option.
pub fn build_agent<'m>(
    algorithm: AlgorithmId,
    model: &'m MomdpModel,
    config: &AgentConfig,
) -> Result<Box<dyn Agent + Send + 'm>> {
    Ok(match algorithm {
        AlgorithmId::Basic => Box::new(BasicMoql::new(model, config.clone())?),
        AlgorithmId::BaselineExpected => Box::new(BaselineExpected::new(model, config.clone())?),
        AlgorithmId::Moss => Box::new(MossSingle::new(model, config.clone())?),
        AlgorithmId::MossTwoPhase => Box::new(MossTwoPhase::new(model, config.clone())?),
        AlgorithmId::Options => Box::new(OptionsAgent::new(
            model,
            all_policy_options(model)?,
            config.clone(),
        )?),
    })
}

/// A trained agent together with its per-episode log.
#[derive(Debug)]
pub struct Trained<A> {
    pub agent: A,
    pub log: Vec<EpisodeRecord>,
}

/// Runs `episodes` episodes, numbering them from 0.
pub fn train<A: Agent + ?Sized>(
    agent: &mut A,
    episodes: u64,
    rng: &mut dyn RngCore,
) -> Result<Vec<EpisodeRecord>> {
    (0..episodes).map(|e| agent.run_episode(e, rng)).collect()
}

fn train_owned<A: Agent, R: RngCore>(
    mut agent: A,
    episodes: u64,
    rng: &mut R,
) -> Result<Trained<A>> {
    let log = train(&mut agent, episodes, rng)?;
    Ok(Trained { agent, log })
}

pub fn run_basic_moql<'m, R: RngCore>(
    model: &'m MomdpModel,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<Trained<BasicMoql<'m>>> {
    train_owned(BasicMoql::new(model, config.clone())?, config.episodes, rng)
}

pub fn run_baseline_expected<'m, R: RngCore>(
    model: &'m MomdpModel,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<Trained<BaselineExpected<'m>>> {
    train_owned(
        BaselineExpected::new(model, config.clone())?,
        config.episodes,
        rng,
    )
}

pub fn run_moss_single<'m, R: RngCore>(
    model: &'m MomdpModel,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<Trained<MossSingle<'m>>> {
    train_owned(
        MossSingle::new(model, config.clone())?,
        config.episodes,
        rng,
    )
}

pub fn run_moss_two_phase<'m, R: RngCore>(
    model: &'m MomdpModel,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<Trained<MossTwoPhase<'m>>> {
    train_owned(
        MossTwoPhase::new(model, config.clone())?,
        config.episodes,
        rng,
    )
}

pub fn run_options<'m, R: RngCore>(
    model: &'m MomdpModel,
    options: Vec<PolicyOption>,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<Trained<OptionsAgent<'m>>> {
    train_owned(
        OptionsAgent::new(model, options, config.clone())?,
        config.episodes,
        rng,
    )
}

/// Greedy and exploratory picks from one set of utility vectors. The
/// exploratory pick is drawn from the rank softmax.
pub(crate) fn select<R: Rng + ?Sized>(
    utility: &TloUtility,
    values: &[RewardVector],
    temperature: f64,
    rng: &mut R,
) -> (usize, usize) {
    let greedy = utility.greedy_unchecked(values);
    let chosen = utility.softmax_select_unchecked(values, temperature, rng);
    (greedy, chosen)
}

/// Follows a policy from the initial state along the success route,
/// visiting each state at most once. `choose` picks the action in a
/// decision state given the rollout's accumulation; `accumulate` folds the
/// followed outcome into it. Decision states off the route are resolved by
/// `choose` at a zero accumulation.
pub(crate) fn roll_forward(
    model: &MomdpModel,
    mut choose: impl FnMut(StateId, &RewardVector) -> usize,
    mut accumulate: impl FnMut(StateId, usize, &Outcome, &mut RewardVector),
) -> PolicyLabel {
    let mut actions: Vec<Option<usize>> = vec![None; model.states().len()];
    let mut acc = RewardVector::zeros(model.objectives());
    let mut s = model.initial();
    loop {
        if model.is_terminal(s) || actions[s.0].is_some() {
            break;
        }
        let a = if model.num_actions(s) == 1 {
            0
        } else {
            choose(s, &acc)
        };
        actions[s.0] = Some(a);
        match model.success_outcome(s, a) {
            Some(o) => {
                accumulate(s, a, o, &mut acc);
                s = o.next;
            }
            None => break,
        }
    }
    let zeros = RewardVector::zeros(model.objectives());
    for &d in model.decision_states() {
        if actions[d.0].is_none() {
            actions[d.0] = Some(choose(d, &zeros));
        }
    }
    model.label_of(
        &actions
            .into_iter()
            .map(|a| a.unwrap_or(0))
            .collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{space_traders_original, EnvId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn short(episodes: u64) -> AgentConfig {
        AgentConfig {
            episodes,
            temperature: crate::schedule::Schedule::linear(10.0, 2.0, episodes),
            ..Default::default()
        }
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for a in AlgorithmId::ALL {
            assert_eq!(a.as_str().parse::<AlgorithmId>().unwrap(), a);
        }
        assert!("q-learning".parse::<AlgorithmId>().unwrap_err().is_usage());
    }

    #[test]
    fn fresh_agents_report_the_first_policy() {
        let model = space_traders_original();
        for a in AlgorithmId::ALL {
            let agent = build_agent(a, &model, &AgentConfig::default()).unwrap();
            assert_eq!(agent.greedy_label(), "II", "{a}");
        }
    }

    #[test]
    fn every_agent_trains_and_logs_each_episode() {
        for env in EnvId::ALL {
            let model = env.build(None).unwrap();
            for a in AlgorithmId::ALL {
                let mut agent = build_agent(a, &model, &short(300)).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(3);
                let log = train(agent.as_mut(), 300, &mut rng).unwrap();
                assert_eq!(log.len(), 300);
                assert_eq!(log[299].label, agent.greedy_label());
                assert_eq!(log[0].option_values.is_some(), a == AlgorithmId::Options);
                for r in &log {
                    assert_eq!(r.label.as_str().len(), model.decision_states().len());
                }
            }
        }
    }

    #[test]
    fn identical_seeds_give_identical_logs() {
        let model = space_traders_original();
        for a in AlgorithmId::ALL {
            let run = || {
                let mut agent = build_agent(a, &model, &short(500)).unwrap();
                train(agent.as_mut(), 500, &mut ChaCha8Rng::seed_from_u64(11)).unwrap()
            };
            assert_eq!(run(), run(), "{a}");
        }
    }
}
