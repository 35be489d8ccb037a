//! Exact ground truth for deterministic policies: exhaustive trajectory
//! expansion in decimal arithmetic, and the TLO-optimal policy under the
//! scalarised-expected-return criterion.

use rust_decimal::Decimal;

use crate::envs::{MomdpModel, StateId, StateKind};
use crate::error::{Error, Result};
use crate::label::PolicyLabel;
use crate::tlo::TloUtility;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub probability: Decimal,
    pub total: Vec<Decimal>,
    pub reached_goal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    pub label: PolicyLabel,
    pub mean_return: Vec<Decimal>,
    /// Probability of ending in a goal terminal.
    pub success_probability: Decimal,
    pub trajectories: Vec<Trajectory>,
}

/// All deterministic policies as labels. Decision states vary in state
/// order, the last one fastest; each state's actions in declaration order.
pub fn enumerate_policies(model: &MomdpModel) -> Vec<PolicyLabel> {
    let choices: Vec<Vec<char>> = model
        .decision_states()
        .iter()
        .map(|&s| model.state(s).actions.iter().map(|a| a.letter).collect())
        .collect();
    let mut labels = vec![String::new()];
    for letters in &choices {
        labels = labels
            .iter()
            .flat_map(|prefix| letters.iter().map(move |c| format!("{prefix}{c}")))
            .collect();
    }
    labels.into_iter().map(PolicyLabel::new).collect()
}

pub fn evaluate_policy(model: &MomdpModel, label: &PolicyLabel) -> Result<PolicyEvaluation> {
    let actions = model.policy_actions(label)?;
    let mut trajectories = Vec::new();
    let start = vec![Decimal::ZERO; model.objectives()];
    expand(
        model,
        &actions,
        model.initial(),
        Decimal::ONE,
        Decimal::ONE,
        start,
        &mut trajectories,
    );

    let mut mean_return = vec![Decimal::ZERO; model.objectives()];
    let mut success_probability = Decimal::ZERO;
    for t in &trajectories {
        for (m, r) in mean_return.iter_mut().zip(&t.total) {
            *m += t.probability * r;
        }
        if t.reached_goal {
            success_probability += t.probability;
        }
    }
    Ok(PolicyEvaluation {
        label: label.clone(),
        mean_return: mean_return.into_iter().map(|d| d.normalize()).collect(),
        success_probability: success_probability.normalize(),
        trajectories,
    })
}

fn expand(
    model: &MomdpModel,
    actions: &[usize],
    s: StateId,
    probability: Decimal,
    weight: Decimal,
    total: Vec<Decimal>,
    out: &mut Vec<Trajectory>,
) {
    let state = model.state(s);
    if state.is_terminal() {
        out.push(Trajectory {
            probability,
            total,
            reached_goal: state.kind == StateKind::Goal,
        });
        return;
    }
    for o in &model.action(s, actions[s.0]).outcomes {
        if o.probability.is_zero() {
            continue;
        }
        let next_total = total
            .iter()
            .zip(&o.reward)
            .map(|(t, r)| t + weight * r)
            .collect();
        expand(
            model,
            actions,
            o.next,
            probability * o.probability,
            weight * model.discount(),
            next_total,
            out,
        );
    }
}

/// Evaluations of every deterministic policy, in enumeration order.
pub fn evaluate_all(model: &MomdpModel) -> Vec<PolicyEvaluation> {
    enumerate_policies(model)
        .iter()
        .map(|l| evaluate_policy(model, l).expect("enumerated labels are valid"))
        .collect()
}

/// Index of the TLO-best mean return; ties go to the earliest policy in
/// enumeration order.
fn best_index(evals: &[PolicyEvaluation], u: &TloUtility) -> Result<usize> {
    if evals.is_empty() {
        return Err(Error::input("model has no policies"));
    }
    let mut best = 0;
    for i in 1..evals.len() {
        if u.compare_exact(&evals[i].mean_return, &evals[best].mean_return)?
            == std::cmp::Ordering::Greater
        {
            best = i;
        }
    }
    Ok(best)
}

pub fn ser_optimal(model: &MomdpModel, u: &TloUtility) -> Result<PolicyLabel> {
    let evals = evaluate_all(model);
    Ok(evals[best_index(&evals, u)?].label.clone())
}

/// One row of the oracle table.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub evaluation: PolicyEvaluation,
    pub clipped: Vec<Decimal>,
    pub meets_thresholds: bool,
    pub optimal: bool,
}

pub fn oracle_table(model: &MomdpModel, u: &TloUtility) -> Result<Vec<OracleRow>> {
    let evals = evaluate_all(model);
    let best = best_index(&evals, u)?;
    Ok(evals
        .into_iter()
        .enumerate()
        .map(|(i, evaluation)| OracleRow {
            clipped: u
                .clip_exact(&evaluation.mean_return)
                .into_iter()
                .map(|d| d.normalize())
                .collect(),
            meets_thresholds: u.satisfies_exact(&evaluation.mean_return),
            optimal: i == best,
            evaluation,
        })
        .collect())
}
