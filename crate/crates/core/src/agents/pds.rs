//! Post-decision-state learning: exploit the analytically known factor of
//! the dynamics and learn a value only over what remains stochastic.
//!
//! The environment exposes the split: a known reward component
//! `u_known(s, a)`, a deterministic post-decision mapping `pds(s, a)`, and
//! an unknown residual reward observed at each step. Action values are
//! reconstructed as `Q(s, a) = u_known(s, a) + V(pds(s, a))`, so one visit
//! to a state improves the estimate of every action sharing its
//! post-decision state.

use super::qtable::greedy_index;
use crate::params::AgentHyperparams;

/// The known factor of an environment's dynamics.
pub trait PdsSplit {
    /// Size of the post-decision state space.
    fn pds_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// Deterministic reward component of (state, action).
    fn known_reward(&self, state: usize, action: usize) -> f64;
    /// Deterministic part of the transition.
    fn post_decision(&self, state: usize, action: usize) -> usize;
}

/// Value vector over post-decision states plus the reconstruction rules.
#[derive(Clone, Debug)]
pub struct PdsModel {
    values: Vec<f64>,
}

impl PdsModel {
    pub fn new(split: &impl PdsSplit) -> Self {
        PdsModel { values: vec![0.0; split.pds_states()] }
    }

    pub fn value(&self, pds_state: usize) -> f64 {
        self.values[pds_state]
    }

    /// Reconstructed action value.
    pub fn action_value(&self, split: &impl PdsSplit, state: usize, action: usize) -> f64 {
        split.known_reward(state, action) + self.values[split.post_decision(state, action)]
    }

    /// Row of reconstructed action values for a state.
    pub fn action_row(&self, split: &impl PdsSplit, state: usize) -> Vec<f64> {
        (0..split.num_actions()).map(|a| self.action_value(split, state, a)).collect()
    }

    /// Greedy action under the reconstruction, ties to the lowest index.
    pub fn greedy(&self, split: &impl PdsSplit, state: usize) -> usize {
        greedy_index(&self.action_row(split, state))
    }

    /// Learn from one step: only the unknown reward component and the
    /// observed successor update the post-decision value.
    pub fn update(
        &mut self,
        split: &impl PdsSplit,
        state: usize,
        action: usize,
        unknown_reward: f64,
        next_state: usize,
        hp: &AgentHyperparams,
    ) {
        let pds = split.post_decision(state, action);
        let best_next = self
            .action_row(split, next_state)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let target = unknown_reward + hp.gamma * best_next;
        self.values[pds] = (1.0 - hp.alpha) * self.values[pds] + hp.alpha * target;
    }
}
