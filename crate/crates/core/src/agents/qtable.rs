//! Tabular action-value learning: dense Q-table, the one-step update, and
//! epsilon-greedy selection.

use crate::params::AgentHyperparams;
use crate::rng::SeededRng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("state {state} out of range (table has {states} states)")]
    StateOutOfRange { state: usize, states: usize },
    #[error("action {action} out of range (table has {actions} actions)")]
    ActionOutOfRange { action: usize, actions: usize },
}

/// Dense state-action value table, zero-initialized.
#[derive(Clone, Debug)]
pub struct QTable {
    values: Vec<f64>,
    states: usize,
    actions: usize,
}

impl QTable {
    pub fn new(states: usize, actions: usize) -> Self {
        assert!(states > 0 && actions > 0, "table dimensions must be positive");
        QTable { values: vec![0.0; states * actions], states, actions }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let base = state * self.actions;
        &self.values[base..base + self.actions]
    }

    fn check(&self, state: usize, action: usize) -> Result<(), TableError> {
        if state >= self.states {
            return Err(TableError::StateOutOfRange { state, states: self.states });
        }
        if action >= self.actions {
            return Err(TableError::ActionOutOfRange { action, actions: self.actions });
        }
        Ok(())
    }

    /// One-step bootstrapped update with an explicit learning rate:
    /// `value <- (1 - alpha) * value + alpha * (reward + gamma * max_a' value(next, a'))`.
    /// Touches exactly the (state, action) entry and returns its new value.
    pub fn update_with_alpha(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        alpha: f64,
        gamma: f64,
    ) -> Result<f64, TableError> {
        self.check(state, action)?;
        self.check(next_state, 0)?;
        let best_next = self
            .row(next_state)
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let entry = &mut self.values[state * self.actions + action];
        *entry = (1.0 - alpha) * *entry + alpha * (reward + gamma * best_next);
        Ok(*entry)
    }

    /// Greedy action with ties broken to the lowest index.
    pub fn greedy(&self, state: usize) -> usize {
        greedy_index(self.row(state))
    }

    /// Greedy policy over every state.
    pub fn policy(&self) -> Vec<usize> {
        (0..self.states).map(|s| self.greedy(s)).collect()
    }
}

/// Bellman update at the hyperparameter learning rate.
pub fn q_update(
    table: &mut QTable,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    hp: &AgentHyperparams,
) -> Result<f64, TableError> {
    table.update_with_alpha(state, action, reward, next_state, hp.alpha, hp.gamma)
}

/// Index of the largest entry, lowest index on ties.
pub fn greedy_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Pick the greedy action with probability `1 - eps`, otherwise a uniform
/// index. The exploration draw happens first, so the greedy path consumes
/// one uniform and the explore path two.
pub fn epsilon_greedy(q_row: &[f64], eps: f64, rng: &mut SeededRng) -> usize {
    assert!(!q_row.is_empty(), "cannot select from an empty action row");
    if rng.chance(eps) {
        rng.next_below(q_row.len())
    } else {
        greedy_index(q_row)
    }
}

/// Learning-rate schedule for tabular updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaMode {
    /// Constant `hp.alpha`.
    Fixed,
    /// Per-(state, action) decay `1 / (1 + visits)^0.6`; required by the
    /// convergence guarantee, slower in non-stationary play.
    VisitDecay,
}

/// Q-learning defender: table plus exploration and learning-rate policy.
#[derive(Clone, Debug)]
pub struct QLearningAgent {
    pub table: QTable,
    pub hp: AgentHyperparams,
    pub alpha_mode: AlphaMode,
    visits: Vec<u32>,
}

impl QLearningAgent {
    pub fn new(states: usize, actions: usize, hp: AgentHyperparams, alpha_mode: AlphaMode) -> Self {
        QLearningAgent {
            table: QTable::new(states, actions),
            hp,
            alpha_mode,
            visits: vec![0; states * actions],
        }
    }

    pub fn select(&self, state: usize, eps: f64, rng: &mut SeededRng) -> usize {
        epsilon_greedy(self.table.row(state), eps, rng)
    }

    pub fn observe(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        let alpha = match self.alpha_mode {
            AlphaMode::Fixed => self.hp.alpha,
            AlphaMode::VisitDecay => {
                let n = &mut self.visits[state * self.table.actions() + action];
                *n += 1;
                1.0 / (*n as f64).powf(0.6)
            }
        };
        self.table
            .update_with_alpha(state, action, reward, next_state, alpha, self.hp.gamma)
            .expect("indices checked by caller");
    }
}
