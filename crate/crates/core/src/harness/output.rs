//! CSV artifacts and the run manifest.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{ExperimentSummary, TrialResult};
use super::spec::ExperimentSpec;
use crate::envs::MomdpModel;
use crate::error::{Error, Result};
use crate::label::PolicyLabel;
use crate::oracle::oracle_table;

/// Per-label chart attributes: the label's position in the model's policy
/// enumeration and whether its exact mean return meets the thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartKey {
    rows: HashMap<PolicyLabel, (usize, bool)>,
}

impl ChartKey {
    pub fn new(model: &MomdpModel) -> Result<Self> {
        let rows = oracle_table(model, model.utility())?
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r.evaluation.label, (i, r.meets_thresholds)))
            .collect();
        Ok(ChartKey { rows })
    }

    pub fn ordinal(&self, label: &PolicyLabel) -> Option<usize> {
        self.rows.get(label).map(|r| r.0)
    }

    pub fn above_threshold(&self, label: &PolicyLabel) -> bool {
        self.rows.get(label).is_some_and(|r| r.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRow {
    pub episode: u64,
    pub label: PolicyLabel,
    pub ordinal: Option<usize>,
    pub above_threshold: bool,
}

/// One chart row per logged episode.
pub fn chart_rows(result: &TrialResult, key: &ChartKey) -> Vec<ChartRow> {
    result
        .log
        .iter()
        .map(|r| ChartRow {
            episode: r.episode,
            label: r.label.clone(),
            ordinal: key.ordinal(&r.label),
            above_threshold: key.above_threshold(&r.label),
        })
        .collect()
}

/// Writes the greedy-policy chart series of one trial.
pub fn emit_policy_chart(path: &Path, result: &TrialResult, key: &ChartKey) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in chart_rows(result, key) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a trial's episode log. Options runs get one pair of columns per
/// option holding Q at the initial state.
pub fn write_trial_log(path: &Path, result: &TrialResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let Some(first) = result.log.first() else {
        w.write_record(["episode", "greedy_label", "alpha", "temperature"])?;
        w.flush()?;
        return Ok(());
    };
    let objectives = first.episode_return.len();
    let mut header = vec!["episode".to_owned(), "greedy_label".to_owned()];
    header.extend((1..=objectives).map(|i| format!("return_obj{i}")));
    header.extend(["alpha".to_owned(), "temperature".to_owned()]);
    if let Some(values) = &first.option_values {
        for k in 0..values.len() {
            header.extend((1..=objectives).map(|i| format!("q_option{k}_obj{i}")));
        }
    }
    w.write_record(&header)?;

    let mut record = Vec::with_capacity(header.len());
    for r in &result.log {
        record.clear();
        record.push(r.episode.to_string());
        record.push(r.label.to_string());
        record.extend(r.episode_return.iter().map(f64::to_string));
        record.push(r.alpha.to_string());
        record.push(r.temperature.to_string());
        for v in r.option_values.iter().flatten() {
            record.extend(v.iter().map(f64::to_string));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    algorithm: &'a str,
    environment: &'a str,
    label: &'a PolicyLabel,
    count: u32,
    oracle_optimal: &'a PolicyLabel,
    match_fraction: f64,
}

pub fn write_summary(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (label, count) in &summary.counts {
        w.serialize(SummaryRow {
            algorithm: &summary.algorithm,
            environment: &summary.environment,
            label,
            count: *count,
            oracle_optimal: &summary.oracle_optimal,
            match_fraction: summary.match_fraction,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

/// Contents of `manifest.toml`: the resolved spec plus what happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub master_seed: u64,
    /// Decimal strings; TOML integers cannot hold every 64-bit seed.
    pub trial_seeds: Vec<String>,
    pub oracle_optimal: PolicyLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<(String, u32)>,
    pub spec: ExperimentSpec,
}

impl Manifest {
    pub fn new(spec: &ExperimentSpec, oracle_optimal: PolicyLabel) -> Self {
        Manifest {
            status: RunStatus::Running,
            failure: None,
            master_seed: spec.seed,
            trial_seeds: (0..spec.trials)
                .map(|k| spec.trial_seed(k).to_string())
                .collect(),
            oracle_optimal,
            match_fraction: None,
            counts: Vec::new(),
            spec: spec.clone(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("manifest: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::input(format!("manifest: {e}")))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("manifest.toml"), self.to_toml()?)?;
        Ok(())
    }
}
