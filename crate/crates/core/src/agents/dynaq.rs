//! Dyna-Q: a learned tabular environment model generating hypothetical
//! experience that accelerates Q-learning.

use std::collections::BTreeMap;

use super::qtable::{AlphaMode, QTable};
use crate::params::AgentHyperparams;
use crate::rng::SeededRng;

#[derive(Clone, Debug, Default)]
struct Cell {
    visits: u64,
    planned: u64,
    reward_sum: f64,
    // BTreeMap keeps sampling order deterministic across runs.
    next_counts: BTreeMap<usize, u64>,
}

/// Empirical transition and reward model over visited (state, action) pairs.
#[derive(Clone, Debug)]
pub struct DynaModel {
    actions: usize,
    cells: BTreeMap<usize, Cell>,
    /// Visited (state, action) pairs in first-visit order, for uniform sampling.
    visited: Vec<(usize, usize)>,
}

impl DynaModel {
    pub fn new(actions: usize) -> Self {
        assert!(actions > 0);
        DynaModel { actions, cells: BTreeMap::new(), visited: Vec::new() }
    }

    pub fn visited_pairs(&self) -> usize {
        self.visited.len()
    }

    /// Record one real transition.
    pub fn record(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        let key = state * self.actions + action;
        let cell = self.cells.entry(key).or_insert_with(|| {
            self.visited.push((state, action));
            Cell::default()
        });
        cell.visits += 1;
        cell.reward_sum += reward;
        *cell.next_counts.entry(next_state).or_insert(0) += 1;
    }

    pub fn mean_reward(&self, state: usize, action: usize) -> Option<f64> {
        let cell = self.cells.get(&(state * self.actions + action))?;
        Some(cell.reward_sum / cell.visits as f64)
    }

    fn sample_next(&self, cell: &Cell, rng: &mut SeededRng) -> usize {
        let total = cell.visits;
        let mut draw = (rng.next_f64() * total as f64) as u64;
        for (&next, &count) in &cell.next_counts {
            if draw < count {
                return next;
            }
            draw -= count;
        }
        *cell.next_counts.keys().next_back().expect("non-empty cell")
    }

    /// Run `planning_steps` hypothetical updates: pick a visited pair
    /// uniformly, sample a successor from its empirical distribution, and
    /// apply the Bellman update with the empirical mean reward. No-op on an
    /// empty model.
    ///
    /// In `VisitDecay` mode the step size anneals with the pair's total
    /// update count (real and hypothetical); a constant step size would
    /// keep re-injecting successor-sampling noise forever.
    pub fn plan(
        &mut self,
        table: &mut QTable,
        planning_steps: usize,
        hp: &AgentHyperparams,
        alpha_mode: AlphaMode,
        rng: &mut SeededRng,
    ) {
        if self.visited.is_empty() {
            return;
        }
        for _ in 0..planning_steps {
            let (state, action) = self.visited[rng.next_below(self.visited.len())];
            let cell = self
                .cells
                .get_mut(&(state * self.actions + action))
                .expect("visited pairs have cells");
            let reward = cell.reward_sum / cell.visits as f64;
            let alpha = match alpha_mode {
                AlphaMode::Fixed => hp.alpha,
                AlphaMode::VisitDecay => {
                    1.0 / (1.0 + (cell.visits + cell.planned) as f64).powf(0.6)
                }
            };
            cell.planned += 1;
            let cell = &self.cells[&(state * self.actions + action)];
            let next = self.sample_next(cell, rng);
            table
                .update_with_alpha(state, action, reward, next, alpha, hp.gamma)
                .expect("model indices fit the table");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::qtable::q_update;

    #[test]
    fn empty_model_is_a_no_op() {
        let mut model = DynaModel::new(2);
        let mut table = QTable::new(3, 2);
        let mut rng = SeededRng::new(1);
        model.plan(&mut table, 50, &AgentHyperparams::default(), AlphaMode::Fixed, &mut rng);
        for s in 0..3 {
            assert!(table.row(s).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zero_planning_steps_change_nothing() {
        let mut model = DynaModel::new(2);
        model.record(0, 1, 1.0, 2);
        let mut table = QTable::new(3, 2);
        let mut rng = SeededRng::new(1);
        model.plan(&mut table, 0, &AgentHyperparams::default(), AlphaMode::Fixed, &mut rng);
        assert!(table.row(0).iter().all(|&v| v == 0.0));
    }

    /// On a deterministic chain the model is exact, so K planning steps on
    /// the only visited pair move the entry exactly like K real replays.
    #[test]
    fn exact_model_planning_equals_real_replays() {
        let hp = AgentHyperparams::default();
        let mut model = DynaModel::new(1);
        model.record(0, 0, 2.0, 1);

        let mut planned = QTable::new(2, 1);
        let mut rng = SeededRng::new(5);
        let k = 7;
        model.plan(&mut planned, k, &hp, AlphaMode::Fixed, &mut rng);

        let mut replayed = QTable::new(2, 1);
        for _ in 0..k {
            q_update(&mut replayed, 0, 0, 2.0, 1, &hp).unwrap();
        }
        assert_eq!(planned.get(0, 0), replayed.get(0, 0));
    }

    #[test]
    fn empirical_distribution_tracks_counts() {
        let mut model = DynaModel::new(1);
        for _ in 0..750 {
            model.record(0, 0, 1.0, 1);
        }
        for _ in 0..250 {
            model.record(0, 0, 1.0, 2);
        }
        let cell = &model.cells[&0];
        let mut rng = SeededRng::new(3);
        let n = 10_000;
        let mut to_one = 0;
        for _ in 0..n {
            if model.sample_next(cell, &mut rng) == 1 {
                to_one += 1;
            }
        }
        let p = 0.75;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((to_one as f64 - n as f64 * p).abs() < 3.0 * sigma);
        assert_eq!(model.mean_reward(0, 0), Some(1.0));
    }
}
