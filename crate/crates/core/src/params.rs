//! Learning hyperparameters and reward weighting shared across agents and
//! environments.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{field} = {value} is outside {expected}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("at least one reward weight must be strictly positive")]
    AllWeightsZero,
}

/// Q-update and exploration parameters.
///
/// The exploration probability follows
/// `epsilon(t) = max(epsilon_min, epsilon0 * epsilon_decay^t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentHyperparams {
    /// Learning rate in (0, 1].
    pub alpha: f64,
    /// Discount factor in [0, 1).
    pub gamma: f64,
    /// Initial exploration probability.
    pub epsilon0: f64,
    /// Exploration floor.
    pub epsilon_min: f64,
    /// Per-slot multiplicative decay in (0, 1].
    pub epsilon_decay: f64,
}

impl Default for AgentHyperparams {
    fn default() -> Self {
        AgentHyperparams {
            alpha: 0.7,
            gamma: 0.1,
            epsilon0: 0.9,
            epsilon_min: 0.01,
            epsilon_decay: 0.995,
        }
    }
}

impl AgentHyperparams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let checks: [(&str, f64, bool, &str); 5] = [
            ("alpha", self.alpha, self.alpha > 0.0 && self.alpha <= 1.0, "(0, 1]"),
            ("gamma", self.gamma, (0.0..1.0).contains(&self.gamma), "[0, 1)"),
            (
                "epsilon0",
                self.epsilon0,
                (0.0..=1.0).contains(&self.epsilon0),
                "[0, 1]",
            ),
            (
                "epsilon_min",
                self.epsilon_min,
                self.epsilon_min >= 0.0 && self.epsilon_min <= self.epsilon0,
                "[0, epsilon0]",
            ),
            (
                "epsilon_decay",
                self.epsilon_decay,
                self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0,
                "(0, 1]",
            ),
        ];
        for (field, value, ok, expected) in checks {
            if !ok {
                return Err(ParamError::OutOfRange { field, value, expected });
            }
        }
        Ok(())
    }

    /// Exploration probability at slot t.
    pub fn epsilon_at(&self, t: u64) -> f64 {
        let mut e = self.epsilon0;
        // Iterative product: bit-identical to the running schedule the
        // experiment loop keeps, unlike powf.
        for _ in 0..t {
            e *= self.epsilon_decay;
            if e <= self.epsilon_min {
                return self.epsilon_min;
            }
        }
        e.max(self.epsilon_min)
    }
}

/// Running epsilon schedule; one multiplication per slot.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonSchedule {
    current: f64,
    min: f64,
    decay: f64,
}

impl EpsilonSchedule {
    pub fn new(hp: &AgentHyperparams) -> Self {
        EpsilonSchedule {
            current: hp.epsilon0,
            min: hp.epsilon_min,
            decay: hp.epsilon_decay,
        }
    }

    /// Epsilon for the current slot.
    pub fn value(&self) -> f64 {
        self.current.max(self.min)
    }

    /// Advance one slot and return the epsilon that was in force.
    pub fn step(&mut self) -> f64 {
        let v = self.value();
        self.current *= self.decay;
        v
    }
}

/// Linear utility weights over the per-slot performance components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardWeights {
    /// Per bit/s/Hz of spectral-efficiency proxy log2(1 + sinr).
    pub w_sinr: f64,
    /// Per unit error probability.
    pub w_ber: f64,
    /// Per joule.
    pub w_energy: f64,
    /// Per second.
    pub w_delay: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_sinr: 1.0,
            w_ber: 1.0,
            w_energy: 0.5,
            w_delay: 0.5,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (field, value) in [
            ("w_sinr", self.w_sinr),
            ("w_ber", self.w_ber),
            ("w_energy", self.w_energy),
            ("w_delay", self.w_delay),
        ] {
            if !(value >= 0.0) {
                return Err(ParamError::OutOfRange {
                    field,
                    value,
                    expected: ">= 0",
                });
            }
        }
        if self.w_sinr == 0.0 && self.w_ber == 0.0 && self.w_energy == 0.0 && self.w_delay == 0.0 {
            return Err(ParamError::AllWeightsZero);
        }
        Ok(())
    }
}
