//! Global episode statistics used by MOSS agents to value an action over
//! all episodes, including those that never reach the current state.

use crate::envs::StateId;
use crate::error::{Error, Result};
use crate::reward::RewardVector;

use super::table::{AugmentedState, QTable};

#[derive(Debug, Clone, PartialEq)]
pub struct StateStats {
    /// E(s): average return of episodes that visited `s`.
    pub return_when_visited: RewardVector,
    /// v(s): number of episodes that visited `s`.
    pub visits: u64,
    /// b(s): whether the current episode has visited `s`.
    pub visited: bool,
    /// P(s): average reward accumulated on arrival at `s`.
    pub accumulated: RewardVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalStats {
    /// E_π: average per-episode return.
    pub episode_return: RewardVector,
    /// v_π: number of episodes started.
    pub episodes: u64,
    pub states: Vec<StateStats>,
}

impl GlobalStats {
    pub fn new(num_states: usize, objectives: usize) -> Self {
        let fresh = StateStats {
            return_when_visited: RewardVector::zeros(objectives),
            visits: 0,
            visited: false,
            accumulated: RewardVector::zeros(objectives),
        };
        GlobalStats {
            episode_return: RewardVector::zeros(objectives),
            episodes: 0,
            states: vec![fresh; num_states],
        }
    }

    pub fn reset(&mut self) {
        *self = GlobalStats::new(self.states.len(), self.episode_return.len());
    }

    /// Clears everything except the per-state returns E(s), which carry
    /// over between statistics-gathering phases.
    pub fn restart_counts(&mut self) {
        let n = self.episode_return.len();
        self.episode_return = RewardVector::zeros(n);
        self.episodes = 0;
        for st in &mut self.states {
            st.visits = 0;
            st.visited = false;
            st.accumulated = RewardVector::zeros(n);
        }
    }

    pub fn state(&self, s: StateId) -> &StateStats {
        &self.states[s.0]
    }

    pub fn begin_episode(&mut self) {
        self.episodes += 1;
        for st in &mut self.states {
            st.visited = false;
        }
    }

    /// Moves E_π and every visited E(s) toward the finished episode's return.
    pub fn end_episode(&mut self, episode_return: &RewardVector, alpha: f64) {
        self.episode_return.move_toward(episode_return, alpha);
        for st in self.states.iter_mut().filter(|st| st.visited) {
            st.return_when_visited.move_toward(episode_return, alpha);
        }
    }

    /// Counts the first arrival at `s` in this episode and moves P(s) toward
    /// the reward accumulated so far.
    pub fn record_arrival(&mut self, s: StateId, accumulated: &RewardVector, alpha: f64) {
        let st = &mut self.states[s.0];
        if !st.visited {
            st.visits += 1;
            st.visited = true;
        }
        st.accumulated.move_toward(accumulated, alpha);
    }

    /// p(s) = v(s) / v_π.
    pub fn visit_probability(&self, s: StateId) -> Result<f64> {
        if self.episodes == 0 {
            return Err(Error::InvalidCall("no episode has been started".into()));
        }
        Ok(self.states[s.0].visits as f64 / self.episodes as f64)
    }

    /// E_¬s = (E_π − p(s)·E(s)) / (1 − p(s)): average return of episodes
    /// that did not visit `s`. `None` when every episode visited `s`.
    pub fn off_state_return(&self, s: StateId) -> Result<Option<RewardVector>> {
        let p = self.visit_probability(s)?;
        if self.states[s.0].visits == self.episodes {
            return Ok(None);
        }
        let mut out = self.episode_return.clone();
        out.add_scaled(&self.states[s.0].return_when_visited, -p);
        Ok(Some(&out * (1.0 / (1.0 - p))))
    }

    /// The augmented state `(s, P(s))` and the all-episode value of each
    /// action given its local values `q`:
    /// `U(a) = p'·(P(s) + Q(a)) + (1 − p')·E_¬s` with `p' = max(p(s), floor)`,
    /// or `U(a) = P(s) + Q(a)` when every episode visits `s`.
    pub fn holistic_values(
        &self,
        s: StateId,
        q: &[RewardVector],
        floor: Option<f64>,
    ) -> Result<Vec<RewardVector>> {
        let local = |qa: &RewardVector| qa + &self.states[s.0].accumulated;
        let Some(off) = self.off_state_return(s)? else {
            return Ok(q.iter().map(local).collect());
        };
        let p = self.visit_probability(s)?;
        let weight = floor.map_or(p, |f| p.max(f));
        Ok(q.iter()
            .map(|qa| {
                let mut u = &local(qa) * weight;
                u.add_scaled(&off, 1.0 - weight);
                u
            })
            .collect())
    }

    pub fn augmented(&self, s: StateId, grid: f64) -> AugmentedState {
        AugmentedState::new(s, &self.states[s.0].accumulated, grid)
    }
}

/// Records an arrival at `s` with accumulated reward `accumulated`, then
/// returns the augmented state and holistic action values.
#[allow(clippy::too_many_arguments)]
pub fn update_statistics(
    stats: &mut GlobalStats,
    q: &QTable<AugmentedState>,
    s: StateId,
    actions: usize,
    accumulated: &RewardVector,
    alpha: f64,
    floor: Option<f64>,
    grid: f64,
) -> Result<(AugmentedState, Vec<RewardVector>)> {
    if stats.episodes == 0 {
        return Err(Error::InvalidCall(
            "update_statistics before any episode start".into(),
        ));
    }
    stats.record_arrival(s, accumulated, alpha);
    let key = stats.augmented(s, grid);
    let u = stats.holistic_values(s, &q.row(&key, actions), floor)?;
    Ok((key, u))
}
