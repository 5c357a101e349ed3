//! Finite-state Markov fading: each radio link holds one independent chain
//! over a shared list of power gain levels.

use crate::rng::SeededRng;
use thiserror::Error;

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("gain_levels must be non-empty")]
    NoLevels,
    #[error("gain_levels must be strictly increasing and positive (index {index})")]
    LevelsNotIncreasing { index: usize },
    #[error("transition matrix must be {levels}x{levels}, row {row} has {len} entries")]
    BadShape { levels: usize, row: usize, len: usize },
    #[error("transition row {row} sums to {sum}, expected 1 within 1e-12")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("transition entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
}

/// Gain levels plus a row-stochastic transition matrix over them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    gain_levels: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl ChannelModel {
    pub fn new(gain_levels: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        if gain_levels.is_empty() {
            return Err(ChannelError::NoLevels);
        }
        for i in 0..gain_levels.len() {
            let ok = gain_levels[i] > 0.0 && (i == 0 || gain_levels[i] > gain_levels[i - 1]);
            if !ok {
                return Err(ChannelError::LevelsNotIncreasing { index: i });
            }
        }
        let n = gain_levels.len();
        if transition.len() != n {
            return Err(ChannelError::BadShape { levels: n, row: transition.len(), len: 0 });
        }
        for (row, probs) in transition.iter().enumerate() {
            if probs.len() != n {
                return Err(ChannelError::BadShape { levels: n, row, len: probs.len() });
            }
            let mut sum = 0.0;
            for (col, &p) in probs.iter().enumerate() {
                if p < 0.0 {
                    return Err(ChannelError::NegativeEntry { row, col, value: p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ChannelError::RowNotStochastic { row, sum });
            }
        }
        Ok(ChannelModel { gain_levels, transition })
    }

    /// Birth-death chain over `levels` gains: stay with probability `stay`,
    /// move one level up or down with probability `(1 - stay) / 2` each.
    /// At the edges the blocked move folds into staying, which makes the
    /// stationary distribution exactly uniform.
    pub fn birth_death(gain_levels: Vec<f64>, stay: f64) -> Result<Self, ChannelError> {
        let n = gain_levels.len();
        let move_p = (1.0 - stay) / 2.0;
        let mut transition = vec![vec![0.0; n]; n];
        for (i, row) in transition.iter_mut().enumerate() {
            if n == 1 {
                row[0] = 1.0;
                continue;
            }
            let down = if i > 0 { move_p } else { 0.0 };
            let up = if i + 1 < n { move_p } else { 0.0 };
            if i > 0 {
                row[i - 1] = down;
            }
            if i + 1 < n {
                row[i + 1] = up;
            }
            row[i] = 1.0 - down - up;
        }
        Self::new(gain_levels, transition)
    }

    pub fn levels(&self) -> usize {
        self.gain_levels.len()
    }

    pub fn gain(&self, bin: usize) -> f64 {
        self.gain_levels[bin]
    }

    pub fn gain_levels(&self) -> &[f64] {
        &self.gain_levels
    }

    pub fn row(&self, bin: usize) -> &[f64] {
        &self.transition[bin]
    }

    /// Full copy of the transition rows.
    pub fn row_matrix(&self) -> Vec<Vec<f64>> {
        self.transition.clone()
    }

    /// Advance one slot from `bin`, drawing from `rng`.
    pub fn step(&self, bin: usize, rng: &mut SeededRng) -> usize {
        rng.sample_discrete(&self.transition[bin])
    }
}
