use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::{self, ChartKey, Manifest, RunStatus};
use super::spec::ExperimentSpec;
use crate::agents::{build_agent, train, EpisodeRecord};
use crate::envs::MomdpModel;
use crate::error::{Error, Result};
use crate::label::PolicyLabel;
use crate::oracle::{enumerate_policies, ser_optimal};

/// Outcome of one independent trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u32,
    pub seed: u64,
    /// Greedy policy after the last episode.
    pub label: PolicyLabel,
    pub log: Vec<EpisodeRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub algorithm: String,
    pub environment: String,
    /// Final-policy counts. [`summarize`] lists the labels seen, sorted;
    /// [`run_experiment`] lists every policy of the model.
    pub counts: Vec<(PolicyLabel, u32)>,
    /// Per trial, in trial order: did the final policy equal the oracle's?
    pub matches: Vec<bool>,
    pub oracle_optimal: PolicyLabel,
    pub match_fraction: f64,
}

impl ExperimentSummary {
    pub fn trials(&self) -> u32 {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    pub fn count(&self, label: &str) -> u32 {
        self.counts
            .iter()
            .find(|(l, _)| *l == label)
            .map_or(0, |(_, c)| *c)
    }

    /// Labels with the highest count (several on a tie).
    pub fn modal(&self) -> Vec<&PolicyLabel> {
        let top = self.counts.iter().map(|(_, c)| *c).max().unwrap_or(0);
        self.counts
            .iter()
            .filter(|(_, c)| *c == top && top > 0)
            .map(|(l, _)| l)
            .collect()
    }

    /// True when `label` is the single most frequent final policy.
    pub fn is_modal(&self, label: &str) -> bool {
        matches!(self.modal().as_slice(), [only] if **only == label)
    }

    /// Reorders the counts to follow `labels`, adding zero rows for missing
    /// ones. Labels outside `labels` are kept at the end.
    pub fn in_order(mut self, labels: &[PolicyLabel]) -> Self {
        let mut rest = std::mem::take(&mut self.counts);
        for l in labels {
            let c = rest
                .iter()
                .position(|(x, _)| x == l)
                .map_or(0, |i| rest.remove(i).1);
            self.counts.push((l.clone(), c));
        }
        self.counts.append(&mut rest);
        self
    }

    /// Compact `LABEL count` listing of the non-zero rows.
    pub fn counts_line(&self) -> String {
        let parts: Vec<String> = self
            .counts
            .iter()
            .filter(|(_, c)| *c > 0)
            .map(|(l, c)| format!("{l} {c}"))
            .collect();
        parts.join(", ")
    }
}

/// Counts the final policies of `results` and the fraction equal to
/// `oracle_label`. Algorithm and environment are left empty.
pub fn summarize(results: &[TrialResult], oracle_label: &PolicyLabel) -> ExperimentSummary {
    let mut counts = BTreeMap::new();
    for r in results {
        *counts.entry(r.label.clone()).or_insert(0u32) += 1;
    }
    let matches: Vec<bool> = results.iter().map(|r| r.label == *oracle_label).collect();
    let hits = matches.iter().filter(|m| **m).count();
    ExperimentSummary {
        algorithm: String::new(),
        environment: String::new(),
        counts: counts.into_iter().collect(),
        matches,
        oracle_optimal: oracle_label.clone(),
        match_fraction: if results.is_empty() {
            0.0
        } else {
            hits as f64 / results.len() as f64
        },
    }
}

/// Runs trial `k` of `spec` on `model` from its derived seed.
pub fn run_trial(spec: &ExperimentSpec, model: &MomdpModel, k: u32) -> Result<TrialResult> {
    let seed = spec.trial_seed(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent = build_agent(spec.algorithm, model, &spec.agent)?;
    let log = train(agent.as_mut(), spec.agent.episodes, &mut rng)?;
    let label = agent.greedy_label();
    Ok(TrialResult {
        trial: k,
        seed,
        label,
        log,
    })
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub results: Vec<TrialResult>,
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidCall(format!("thread pool: {e}")))
}

/// Runs every trial of `spec` (in parallel, up to `spec.jobs` at once) and
/// summarizes them against the oracle. When `spec.output` is set, per-trial
/// logs and charts, `summary.csv` and `manifest.toml` are written there; a
/// failure part-way leaves the files written so far and a manifest marked
/// failed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Experiment> {
    spec.validate()?;
    let model = spec.model()?;
    let oracle = ser_optimal(&model, model.utility())?;
    let key = ChartKey::new(&model)?;

    let out = spec.output.as_deref();
    let mut manifest = Manifest::new(spec, oracle.clone());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        manifest.write(dir)?;
    }

    let outcome = pool(spec.jobs)?.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|k| {
                let result = run_trial(spec, &model, k)?;
                if let Some(dir) = out {
                    persist_trial(dir, &result, &key)?;
                }
                Ok(result)
            })
            .collect::<Result<Vec<_>>>()
    });
    let finish = |manifest: &mut Manifest, status: RunStatus| -> Result<()> {
        manifest.status = status;
        match out {
            Some(dir) => manifest.write(dir),
            None => Ok(()),
        }
    };

    let results = match outcome {
        Ok(r) => r,
        Err(e) => {
            manifest.failure = Some(e.to_string());
            // The original error matters more than a failed manifest update.
            let _ = finish(&mut manifest, RunStatus::Failed);
            return Err(e);
        }
    };

    let mut summary = summarize(&results, &oracle).in_order(&enumerate_policies(&model));
    summary.algorithm = spec.algorithm.to_string();
    summary.environment = spec.environment.to_string();
    if let Some(dir) = out {
        if let Err(e) = output::write_summary(&dir.join("summary.csv"), &summary) {
            manifest.failure = Some(e.to_string());
            let _ = finish(&mut manifest, RunStatus::Failed);
            return Err(e);
        }
    }
    manifest.counts = summary
        .counts
        .iter()
        .map(|(l, c)| (l.to_string(), *c))
        .collect();
    manifest.match_fraction = Some(summary.match_fraction);
    finish(&mut manifest, RunStatus::Complete)?;
    Ok(Experiment { summary, results })
}

fn persist_trial(dir: &Path, result: &TrialResult, key: &ChartKey) -> Result<()> {
    output::write_trial_log(&dir.join(format!("trial_{}_log.csv", result.trial)), result)?;
    output::emit_policy_chart(
        &dir.join(format!("chart_{}.csv", result.trial)),
        result,
        key,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AlgorithmId;
    use crate::envs::EnvId;
    use crate::harness::EnvSource;
    use crate::reward::RewardVector;

    fn result(trial: u32, label: &str) -> TrialResult {
        TrialResult {
            trial,
            seed: 0,
            label: label.into(),
            log: Vec::new(),
        }
    }

    fn results(spec: &[(&str, usize)]) -> Vec<TrialResult> {
        spec.iter()
            .flat_map(|(l, n)| std::iter::repeat_n(*l, *n))
            .enumerate()
            .map(|(i, l)| result(i as u32, l))
            .collect()
    }

    #[test]
    fn summarize_counts_and_matches() {
        let s = summarize(&results(&[("ID", 20)]), &"DI".into());
        assert_eq!(s.match_fraction, 0.0);
        assert_eq!(s.count("ID"), 20);

        let s = summarize(&results(&[("DI", 15), ("IT", 3), ("TI", 2)]), &"DI".into());
        assert_eq!(s.match_fraction, 0.75);
        assert_eq!(s.trials(), 20);
        assert!(s.is_modal("DI"));

        let s = summarize(&[result(0, "DI")], &"DI".into());
        assert_eq!(s.match_fraction, 1.0);
        assert_eq!(s.matches, vec![true]);
    }

    #[test]
    fn ties_have_no_single_mode() {
        let s = summarize(&results(&[("DI", 2), ("ID", 2)]), &"DI".into());
        assert_eq!(s.modal().len(), 2);
        assert!(!s.is_modal("DI"));
    }

    #[test]
    fn ordering_pads_with_zeros() {
        let s = summarize(&results(&[("DI", 1), ("XX", 1)]), &"DI".into());
        let s = s.in_order(&["II".into(), "DI".into()]);
        let labels: Vec<_> = s
            .counts
            .iter()
            .map(|(l, c)| (l.as_str().to_owned(), *c))
            .collect();
        assert_eq!(
            labels,
            vec![("II".into(), 0), ("DI".into(), 1), ("XX".into(), 1)]
        );
    }

    fn small_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(
            EnvSource::Builtin(EnvId::Original),
            AlgorithmId::BaselineExpected,
        );
        spec.trials = 4;
        spec.set_episodes(200);
        spec.seed = 3;
        spec
    }

    #[test]
    fn trials_are_independent_of_execution_order() {
        let spec = small_spec();
        let model = spec.model().unwrap();
        let forward: Vec<_> = (0..4)
            .map(|k| run_trial(&spec, &model, k).unwrap())
            .collect();
        let mut backward: Vec<_> = (0..4)
            .rev()
            .map(|k| run_trial(&spec, &model, k).unwrap())
            .collect();
        backward.reverse();
        assert_eq!(forward, backward);
        let oracle = "DI".into();
        let mut shuffled = forward.clone();
        shuffled.swap(0, 3);
        assert_eq!(
            summarize(&forward, &oracle).counts,
            summarize(&shuffled, &oracle).counts
        );
    }

    #[test]
    fn experiment_logs_every_episode() {
        let spec = small_spec();
        let exp = run_experiment(&spec).unwrap();
        assert_eq!(exp.results.len(), 4);
        assert_eq!(exp.summary.trials(), 4);
        assert_eq!(exp.summary.counts.len(), 9);
        assert_eq!(exp.summary.oracle_optimal, "DI");
        for r in &exp.results {
            assert_eq!(r.log.len(), 200);
            assert_eq!(r.log.last().unwrap().label, r.label);
            assert_eq!(r.log[0].episode_return.len(), 2);
            assert_ne!(r.log[0].episode_return, RewardVector::zeros(3));
        }
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        let mut spec = small_spec();
        spec.trials = 0;
        assert!(run_experiment(&spec).unwrap_err().is_usage());
        let mut spec = small_spec();
        spec.agent.lambda = 2.0;
        assert!(run_experiment(&spec).unwrap_err().is_usage());
    }
}
