use std::fmt;

use rand::Rng;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;

use crate::error::{Error, Result};
use crate::reward::RewardVector;
use crate::tlo::TloUtility;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    NonTerminal,
    /// Terminal reached by completing the task.
    Goal,
    /// Terminal reached by failing.
    Failure,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: Decimal,
    pub next: StateId,
    pub reward: Vec<Decimal>,
    probability_f64: f64,
    reward_f64: RewardVector,
}

impl Outcome {
    pub fn new(probability: Decimal, next: StateId, reward: Vec<Decimal>) -> Self {
        let reward_f64 = RewardVector::new(reward.iter().map(to_f64).collect());
        Outcome {
            probability_f64: to_f64(&probability),
            probability,
            next,
            reward,
            reward_f64,
        }
    }

    pub fn reward_vector(&self) -> &RewardVector {
        &self.reward_f64
    }
}

impl PartialEq for Outcome {
    fn eq(&self, other: &Self) -> bool {
        self.probability == other.probability
            && self.next == other.next
            && self.reward == other.reward
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionDef {
    pub name: String,
    pub letter: char,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDef {
    pub name: String,
    pub kind: StateKind,
    pub actions: Vec<ActionDef>,
}

impl StateDef {
    pub fn is_terminal(&self) -> bool {
        self.kind != StateKind::NonTerminal
    }
}

/// One transition sampled from the model.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStep {
    pub state: StateId,
    pub action: usize,
    pub next: StateId,
    pub reward: RewardVector,
    pub done: bool,
}

/// A finite, acyclic multi-objective MDP with a point-mass initial state.
///
/// Probabilities and rewards are held as exact decimals; `f64` copies are
/// cached for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomdpModel {
    states: Vec<StateDef>,
    initial: StateId,
    objectives: usize,
    discount: Decimal,
    utility: TloUtility,
    decision_states: Vec<StateId>,
}

fn to_f64(d: &Decimal) -> f64 {
    d.to_f64().expect("decimal fits in f64")
}

impl MomdpModel {
    pub fn new(
        states: Vec<StateDef>,
        initial: StateId,
        objectives: usize,
        discount: Decimal,
        utility: TloUtility,
    ) -> Result<Self> {
        if objectives == 0 {
            return Err(Error::config("model needs at least one objective"));
        }
        if utility.objectives() != objectives {
            return Err(Error::config(format!(
                "utility has {} thresholds, expected {}",
                utility.thresholds().len(),
                objectives - 1
            )));
        }
        if discount < Decimal::ZERO || discount > Decimal::ONE {
            return Err(Error::config(format!("discount {discount} outside [0, 1]")));
        }
        if initial.0 >= states.len() {
            return Err(Error::config("initial state out of range"));
        }
        for s in &states {
            match (s.is_terminal(), s.actions.is_empty()) {
                (true, false) => {
                    return Err(Error::config(format!(
                        "terminal state {} has actions",
                        s.name
                    )))
                }
                (false, true) => {
                    return Err(Error::config(format!("state {} has no actions", s.name)))
                }
                _ => {}
            }
            for (i, a) in s.actions.iter().enumerate() {
                if s.actions[..i].iter().any(|b| b.letter == a.letter) {
                    return Err(Error::config(format!(
                        "state {} repeats action letter {}",
                        s.name, a.letter
                    )));
                }
                if a.outcomes.is_empty() {
                    return Err(Error::config(format!(
                        "{}/{} has no outcomes",
                        s.name, a.name
                    )));
                }
                let mut total = Decimal::ZERO;
                for o in &a.outcomes {
                    if o.probability < Decimal::ZERO {
                        return Err(Error::config(format!(
                            "{}/{} has a negative probability",
                            s.name, a.name
                        )));
                    }
                    if o.next.0 >= states.len() {
                        return Err(Error::config(format!(
                            "{}/{} targets an unknown state",
                            s.name, a.name
                        )));
                    }
                    if o.reward.len() != objectives {
                        return Err(Error::config(format!(
                            "{}/{} reward has {} components, expected {objectives}",
                            s.name,
                            a.name,
                            o.reward.len()
                        )));
                    }
                    total += o.probability;
                }
                if total != Decimal::ONE {
                    return Err(Error::config(format!(
                        "{}/{} outcome probabilities sum to {total}",
                        s.name, a.name
                    )));
                }
            }
        }
        let decision_states = (0..states.len())
            .filter(|&i| !states[i].is_terminal() && states[i].actions.len() > 1)
            .map(StateId)
            .collect();
        let model = MomdpModel {
            states,
            initial,
            objectives,
            discount,
            utility,
            decision_states,
        };
        model.check_acyclic()?;
        Ok(model)
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(m: &MomdpModel, s: usize, mark: &mut [u8]) -> bool {
            match mark[s] {
                1 => return false,
                2 => return true,
                _ => {}
            }
            mark[s] = 1;
            for a in &m.states[s].actions {
                for o in &a.outcomes {
                    if !visit(m, o.next.0, mark) {
                        return false;
                    }
                }
            }
            mark[s] = 2;
            true
        }
        let mut mark = vec![0u8; self.states.len()];
        if visit(self, self.initial.0, &mut mark) {
            Ok(())
        } else {
            Err(Error::config(
                "model graph has a cycle reachable from the initial state",
            ))
        }
    }

    pub fn states(&self) -> &[StateDef] {
        &self.states
    }

    pub fn state(&self, s: StateId) -> &StateDef {
        &self.states[s.0]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name).map(StateId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn objectives(&self) -> usize {
        self.objectives
    }

    pub fn discount(&self) -> Decimal {
        self.discount
    }

    pub fn utility(&self) -> &TloUtility {
        &self.utility
    }

    /// Same dynamics under a different TLO threshold set.
    pub fn with_utility(&self, utility: TloUtility) -> Result<Self> {
        MomdpModel::new(
            self.states.clone(),
            self.initial,
            self.objectives,
            self.discount,
            utility,
        )
    }

    /// Non-terminal states offering more than one action, in state order.
    /// These are the states that contribute a letter to a policy label.
    pub fn decision_states(&self) -> &[StateId] {
        &self.decision_states
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.states[s.0].is_terminal()
    }

    pub fn num_actions(&self, s: StateId) -> usize {
        self.states[s.0].actions.len()
    }

    pub fn action(&self, s: StateId, a: usize) -> &ActionDef {
        &self.states[s.0].actions[a]
    }

    /// Largest number of steps any episode can take.
    pub fn horizon(&self) -> usize {
        fn depth(m: &MomdpModel, s: usize, memo: &mut [Option<usize>]) -> usize {
            if let Some(d) = memo[s] {
                return d;
            }
            let d = m.states[s]
                .actions
                .iter()
                .flat_map(|a| a.outcomes.iter())
                .map(|o| 1 + depth(m, o.next.0, memo))
                .max()
                .unwrap_or(0);
            memo[s] = Some(d);
            d
        }
        let mut memo = vec![None; self.states.len()];
        depth(self, self.initial.0, &mut memo)
    }

    pub fn reset(&self) -> StateId {
        self.initial
    }

    /// Exact probability-weighted mean immediate reward of `(s, a)`.
    pub fn mean_reward(&self, s: StateId, a: usize) -> Vec<Decimal> {
        let mut mean = vec![Decimal::ZERO; self.objectives];
        for o in &self.action(s, a).outcomes {
            for (m, r) in mean.iter_mut().zip(&o.reward) {
                *m += o.probability * r;
            }
        }
        mean
    }

    /// The outcome followed when rolling a policy forward along its intended
    /// route: the most probable outcome that does not end the episode,
    /// earliest listed on ties.
    pub fn success_outcome(&self, s: StateId, a: usize) -> Option<&Outcome> {
        let mut best: Option<&Outcome> = None;
        for o in &self.action(s, a).outcomes {
            if self.is_terminal(o.next) {
                continue;
            }
            if best.is_none_or(|b| o.probability > b.probability) {
                best = Some(o);
            }
        }
        best
    }

    pub fn step<R: Rng + ?Sized>(&self, s: StateId, a: usize, rng: &mut R) -> Result<EpisodeStep> {
        let state = self
            .states
            .get(s.0)
            .ok_or_else(|| Error::input(format!("unknown state {s}")))?;
        if state.is_terminal() {
            return Err(Error::input(format!(
                "cannot act in terminal state {}",
                state.name
            )));
        }
        if a >= state.actions.len() {
            return Err(Error::input(format!(
                "action {a} not available in state {}",
                state.name
            )));
        }
        Ok(self.step_unchecked(s, a, rng))
    }

    pub(crate) fn step_unchecked<R: Rng + ?Sized>(
        &self,
        s: StateId,
        a: usize,
        rng: &mut R,
    ) -> EpisodeStep {
        let outcomes = &self.states[s.0].actions[a].outcomes;
        let chosen = if outcomes.len() == 1 {
            &outcomes[0]
        } else {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            outcomes
                .iter()
                .find(|o| {
                    acc += o.probability_f64;
                    u < acc
                })
                .unwrap_or(&outcomes[outcomes.len() - 1])
        };
        EpisodeStep {
            state: s,
            action: a,
            next: chosen.next,
            reward: chosen.reward_f64.clone(),
            done: self.is_terminal(chosen.next),
        }
    }

    /// Variant in which every action deterministically takes its most
    /// probable outcome.
    pub fn deterministic_variant(&self) -> Self {
        let states = self
            .states
            .iter()
            .map(|s| StateDef {
                name: s.name.clone(),
                kind: s.kind,
                actions: s
                    .actions
                    .iter()
                    .map(|a| {
                        let mut best = &a.outcomes[0];
                        for o in &a.outcomes[1..] {
                            if o.probability > best.probability {
                                best = o;
                            }
                        }
                        ActionDef {
                            name: a.name.clone(),
                            letter: a.letter,
                            outcomes: vec![Outcome::new(
                                Decimal::ONE,
                                best.next,
                                best.reward.clone(),
                            )],
                        }
                    })
                    .collect(),
            })
            .collect();
        MomdpModel::new(
            states,
            self.initial,
            self.objectives,
            self.discount,
            self.utility.clone(),
        )
        .expect("deterministic variant of a valid model is valid")
    }
}

impl MomdpModel {
    /// Per-state action indices of the deterministic policy named by
    /// `label`. Single-action states take their only action; terminal states
    /// map to 0 and are never consulted.
    pub fn policy_actions(&self, label: &crate::label::PolicyLabel) -> Result<Vec<usize>> {
        let letters: Vec<char> = label.letters().collect();
        if letters.len() != self.decision_states.len() {
            return Err(Error::input(format!(
                "label {label} has {} letters, model has {} decision states",
                letters.len(),
                self.decision_states.len()
            )));
        }
        let mut actions = vec![0; self.states.len()];
        for (s, letter) in self.decision_states.iter().zip(letters) {
            actions[s.0] = self.states[s.0]
                .actions
                .iter()
                .position(|a| a.letter == letter)
                .ok_or_else(|| {
                    Error::input(format!(
                        "label {label}: no action {letter:?} in state {}",
                        self.states[s.0].name
                    ))
                })?;
        }
        Ok(actions)
    }

    /// Label of a per-state action assignment.
    pub fn label_of(&self, actions: &[usize]) -> crate::label::PolicyLabel {
        crate::label::PolicyLabel::from_letters(
            self.decision_states
                .iter()
                .map(|s| self.states[s.0].actions[actions[s.0]].letter),
        )
    }
}
