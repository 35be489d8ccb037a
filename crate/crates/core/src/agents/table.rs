use std::collections::HashMap;
use std::hash::Hash;

use crate::envs::StateId;
use crate::reward::RewardVector;

/// A base state paired with a quantized accumulated-reward vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AugmentedState {
    pub state: StateId,
    pub key: Vec<i64>,
}

impl AugmentedState {
    pub fn new(state: StateId, accumulated: &RewardVector, grid: f64) -> Self {
        AugmentedState {
            state,
            key: accumulated
                .iter()
                .map(|x| (x / grid).round() as i64)
                .collect(),
        }
    }
}

/// Sparse vector-valued action-value table with replacing eligibility
/// traces. Entries materialize on first touch with the initial value.
#[derive(Debug, Clone)]
pub struct QTable<K: Eq + Hash> {
    values: HashMap<(K, usize), RewardVector>,
    traces: HashMap<(K, usize), f64>,
    init: RewardVector,
}

impl<K: Eq + Hash + Clone> QTable<K> {
    pub fn new(init: RewardVector) -> Self {
        QTable {
            values: HashMap::new(),
            traces: HashMap::new(),
            init,
        }
    }

    pub fn value(&self, key: K, action: usize) -> &RewardVector {
        self.values.get(&(key, action)).unwrap_or(&self.init)
    }

    pub fn row(&self, key: &K, actions: usize) -> Vec<RewardVector> {
        (0..actions)
            .map(|a| self.value(key.clone(), a).clone())
            .collect()
    }

    pub fn set(&mut self, key: K, action: usize, value: RewardVector) {
        self.values.insert((key, action), value);
    }

    /// Every materialized `((key, action), value)` entry, in no fixed order.
    pub fn entries(&self) -> impl Iterator<Item = (&(K, usize), &RewardVector)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn clear_traces(&mut self) {
        self.traces.clear();
    }

    pub fn traces(&self) -> impl Iterator<Item = (&(K, usize), &f64)> {
        self.traces.iter()
    }

    pub fn live_traces(&self) -> usize {
        self.traces.values().filter(|e| **e != 0.0).count()
    }

    /// One Watkins Q(λ) backup for the pair `(key, action)`:
    /// `δ = r + γ·bootstrap − Q(key, action)`, the pair's trace is set to 1,
    /// every traced entry moves by `α·δ·e`, and traces then decay by
    /// `γλ` when `keep_traces` or are cut to zero otherwise. A missing
    /// bootstrap stands for a terminal successor.
    #[allow(clippy::too_many_arguments)]
    pub fn backup(
        &mut self,
        key: K,
        action: usize,
        reward: &RewardVector,
        bootstrap: Option<&RewardVector>,
        gamma: f64,
        alpha: f64,
        decay: f64,
        keep_traces: bool,
    ) {
        let mut delta = reward.clone();
        if let Some(b) = bootstrap {
            delta.add_scaled(b, gamma);
        }
        delta.add_scaled(self.value(key.clone(), action), -1.0);
        self.traces.insert((key, action), 1.0);
        for (k, e) in &self.traces {
            let q = self
                .values
                .entry(k.clone())
                .or_insert_with(|| self.init.clone());
            q.add_scaled(&delta, alpha * e);
        }
        if keep_traces {
            for e in self.traces.values_mut() {
                *e *= decay;
            }
        } else {
            self.traces.clear();
        }
    }
}

/// Running sample mean of the immediate reward of each `(state, action)`.
#[derive(Debug, Clone)]
pub struct ImmediateRewards {
    sums: HashMap<(StateId, usize), (RewardVector, u64)>,
    objectives: usize,
}

impl ImmediateRewards {
    pub fn new(objectives: usize) -> Self {
        ImmediateRewards {
            sums: HashMap::new(),
            objectives,
        }
    }

    pub fn observe(&mut self, s: StateId, a: usize, reward: &RewardVector) {
        let entry = self
            .sums
            .entry((s, a))
            .or_insert_with(|| (RewardVector::zeros(self.objectives), 0));
        entry.0 += reward;
        entry.1 += 1;
    }

    /// Mean of every reward observed for `(s, a)`; zero before any visit.
    pub fn mean(&self, s: StateId, a: usize) -> RewardVector {
        match self.sums.get(&(s, a)) {
            Some((sum, n)) => RewardVector::new(sum.iter().map(|x| x / *n as f64).collect()),
            None => RewardVector::zeros(self.objectives),
        }
    }

    pub fn visits(&self, s: StateId, a: usize) -> u64 {
        self.sums.get(&(s, a)).map_or(0, |e| e.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal_backup() {
        let mut q = QTable::new(RewardVector::zeros(2));
        q.backup(
            StateId(1),
            0,
            &RewardVector::from([1.0, -10.0]),
            None,
            1.0,
            0.01,
            0.95,
            true,
        );
        assert_eq!(q.value(StateId(1), 0), &RewardVector::from([0.01, -0.1]));
    }

    #[test]
    fn lambda_zero_keeps_only_the_current_pair() {
        let mut q = QTable::new(RewardVector::zeros(2));
        let r = RewardVector::from([0.0, -1.0]);
        q.backup(
            StateId(0),
            0,
            &r,
            Some(&RewardVector::zeros(2)),
            1.0,
            0.1,
            0.0,
            true,
        );
        assert!(q.traces().all(|(_, e)| *e == 0.0));
        q.backup(StateId(1), 2, &r, None, 1.0, 0.1, 0.0, true);
        // The first pair received no credit for the second step.
        assert_eq!(q.value(StateId(0), 0), &RewardVector::from([0.0, -0.1]));
        assert_eq!(q.live_traces(), 0);
    }

    #[test]
    fn traces_propagate_and_cut() {
        let mut q = QTable::new(RewardVector::zeros(1));
        let zero = RewardVector::zeros(1);
        q.backup(StateId(0), 0, &zero, Some(&zero), 1.0, 0.5, 0.5, true);
        q.backup(
            StateId(1),
            0,
            &RewardVector::from([2.0]),
            None,
            1.0,
            0.5,
            0.5,
            false,
        );
        // δ = 2 reaches the earlier pair with trace 0.5.
        assert_eq!(q.value(StateId(0), 0), &RewardVector::from([0.5]));
        assert_eq!(q.value(StateId(1), 0), &RewardVector::from([1.0]));
        assert_eq!(q.live_traces(), 0);
    }

    #[test]
    fn augmented_keys_quantize() {
        let a = AugmentedState::new(StateId(1), &RewardVector::from([0.0, -5.5]), 0.1);
        let b = AugmentedState::new(StateId(1), &RewardVector::from([0.00001, -5.50002]), 0.1);
        assert_eq!(a, b);
        assert_eq!(a.key, vec![0, -55]);
    }

    #[test]
    fn immediate_reward_mean() {
        let mut t = ImmediateRewards::new(2);
        assert_eq!(t.mean(StateId(0), 1), RewardVector::zeros(2));
        t.observe(StateId(0), 1, &RewardVector::from([0.0, -6.0]));
        t.observe(StateId(0), 1, &RewardVector::from([0.0, -1.0]));
        assert_eq!(t.mean(StateId(0), 1), RewardVector::from([0.0, -3.5]));
        assert_eq!(t.visits(StateId(0), 1), 2);
    }
}
