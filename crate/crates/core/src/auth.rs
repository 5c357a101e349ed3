//! PHY-layer spoofing-detection game: an edge node authenticates each
//! incoming message by comparing its channel estimate against the claimed
//! sender's stored record; the acceptance threshold is the defender's
//! action.

use std::collections::VecDeque;

use crate::quant::{QuantError, Quantizer};
use crate::rng::{SeededRng, Stream};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AuthError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("channel vectors have different lengths: {lhs} vs {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },
    #[error("channel record must have positive norm")]
    ZeroRecord,
    #[error("threshold index {index} out of range (grid has {len} entries)")]
    ThresholdOutOfRange { index: usize, len: usize },
}

/// Scenario description for the authentication game.
#[derive(Clone, Debug, PartialEq)]
pub struct AuthConfig {
    /// Channel-estimate dimension.
    pub vec_len: usize,
    /// Relative estimation error of legitimate messages.
    pub legit_noise_sigma: f64,
    /// Relative mean channel difference of the spoofer.
    pub spoof_offset: f64,
    /// (start_slot, probability) steps, sorted, first at slot 0.
    pub spoof_prob_schedule: Vec<(u64, f64)>,
    /// Candidate test thresholds, strictly increasing, >= 0.
    pub threshold_grid: Vec<f64>,
    /// Sliding window of recent outcomes behind the observation.
    pub window: usize,
    pub gain_correct: f64,
    pub cost_false_alarm: f64,
    pub cost_miss: f64,
}

impl Default for AuthConfig {
    fn default() -> Self {
        AuthConfig {
            vec_len: 8,
            legit_noise_sigma: 0.05,
            spoof_offset: 0.4,
            spoof_prob_schedule: vec![(0, 0.1), (10_000, 0.5)],
            threshold_grid: (0..16).map(|i| 0.5 * i as f64 / 15.0).collect(),
            window: 50,
            gain_correct: 1.0,
            cost_false_alarm: 1.0,
            cost_miss: 2.0,
        }
    }
}

impl AuthConfig {
    pub fn validate(&self) -> Result<(), AuthError> {
        if self.vec_len == 0 {
            return Err(AuthError::InvalidConfig {
                field: "vec_len",
                reason: "must be positive".into(),
            });
        }
        if !(self.legit_noise_sigma > 0.0) {
            return Err(AuthError::InvalidConfig {
                field: "legit_noise_sigma",
                reason: "must be positive".into(),
            });
        }
        if !(self.spoof_offset > 0.0) {
            return Err(AuthError::InvalidConfig {
                field: "spoof_offset",
                reason: "must be positive".into(),
            });
        }
        if self.spoof_prob_schedule.first().map(|&(s, _)| s) != Some(0) {
            return Err(AuthError::InvalidConfig {
                field: "spoof_prob_schedule",
                reason: "first entry must start at slot 0".into(),
            });
        }
        for pair in self.spoof_prob_schedule.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(AuthError::InvalidConfig {
                    field: "spoof_prob_schedule",
                    reason: "start slots must be strictly increasing".into(),
                });
            }
        }
        for &(_, p) in &self.spoof_prob_schedule {
            if !(0.0..=1.0).contains(&p) {
                return Err(AuthError::InvalidConfig {
                    field: "spoof_prob_schedule",
                    reason: format!("probability {p} outside [0, 1]"),
                });
            }
        }
        if self.threshold_grid.is_empty() {
            return Err(AuthError::InvalidConfig {
                field: "threshold_grid",
                reason: "must list at least one threshold".into(),
            });
        }
        for (i, &t) in self.threshold_grid.iter().enumerate() {
            let ok = t >= 0.0 && (i == 0 || t > self.threshold_grid[i - 1]);
            if !ok {
                return Err(AuthError::InvalidConfig {
                    field: "threshold_grid",
                    reason: format!("entry {i} = {t} breaks strict increase from 0"),
                });
            }
        }
        if self.window == 0 {
            return Err(AuthError::InvalidConfig {
                field: "window",
                reason: "must be positive".into(),
            });
        }
        for (field, v) in [
            ("gain_correct", self.gain_correct),
            ("cost_false_alarm", self.cost_false_alarm),
            ("cost_miss", self.cost_miss),
        ] {
            if !(v >= 0.0) {
                return Err(AuthError::InvalidConfig {
                    field,
                    reason: format!("{v} must be >= 0"),
                });
            }
        }
        Ok(())
    }

    /// Spoofing probability in force at `slot`.
    pub fn spoof_prob_at(&self, slot: u64) -> f64 {
        let mut p = self.spoof_prob_schedule[0].1;
        for &(start, prob) in &self.spoof_prob_schedule {
            if slot >= start {
                p = prob;
            } else {
                break;
            }
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Legit,
    Spoof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    TrueAccept,
    FalseAlarm,
    Miss,
    TrueReject,
}

impl Classification {
    pub fn of(decision: Decision, truth: Truth) -> Self {
        match (decision, truth) {
            (Decision::Accept, Truth::Legit) => Classification::TrueAccept,
            (Decision::Reject, Truth::Legit) => Classification::FalseAlarm,
            (Decision::Accept, Truth::Spoof) => Classification::Miss,
            (Decision::Reject, Truth::Spoof) => Classification::TrueReject,
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, Classification::TrueAccept | Classification::TrueReject)
    }
}

/// Outcome of authenticating one message.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuthOutcome {
    pub statistic: f64,
    pub decision: Decision,
    pub truth: Truth,
    pub classification: Classification,
}

/// What the defender sees: recent error rates and spoofing frequency over
/// the sliding window. The spoof frequency is the true fraction of
/// spoofed messages in the window — available exactly in simulation,
/// idealized relative to a deployment that would have to estimate it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuthObservation {
    pub recent_false_alarm_rate: f64,
    pub recent_miss_rate: f64,
    pub recent_spoof_freq: f64,
}

/// Normalized squared distance between a channel estimate and the stored
/// record; zero iff they are equal.
pub fn test_statistic(h_est: &[f64], h_rec: &[f64]) -> Result<f64, AuthError> {
    if h_est.len() != h_rec.len() {
        return Err(AuthError::LengthMismatch { lhs: h_est.len(), rhs: h_rec.len() });
    }
    let rec_norm2: f64 = h_rec.iter().map(|x| x * x).sum();
    if rec_norm2 <= 0.0 {
        return Err(AuthError::ZeroRecord);
    }
    let diff2: f64 = h_est.iter().zip(h_rec.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(diff2 / rec_norm2)
}

/// Accept iff the statistic does not exceed the threshold (ties accept).
pub fn decide(statistic: f64, threshold: f64) -> Decision {
    if statistic <= threshold {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// False-alarm and miss rates over a window of outcomes. Empty
/// denominators yield 0 by convention.
pub fn rates<'a, I>(outcomes: I) -> (f64, f64)
where
    I: IntoIterator<Item = &'a AuthOutcome>,
{
    let mut legit = 0usize;
    let mut spoof = 0usize;
    let mut false_alarms = 0usize;
    let mut misses = 0usize;
    for o in outcomes {
        match o.truth {
            Truth::Legit => {
                legit += 1;
                if o.classification == Classification::FalseAlarm {
                    false_alarms += 1;
                }
            }
            Truth::Spoof => {
                spoof += 1;
                if o.classification == Classification::Miss {
                    misses += 1;
                }
            }
        }
    }
    let far = if legit > 0 { false_alarms as f64 / legit as f64 } else { 0.0 };
    let mdr = if spoof > 0 { misses as f64 / spoof as f64 } else { 0.0 };
    (far, mdr)
}

/// Single-owner environment handle for the authentication game.
#[derive(Clone, Debug)]
pub struct AuthEnv {
    cfg: AuthConfig,
    record: Vec<f64>,
    /// Per-component spoofer channel before estimation noise.
    spoof_base: Vec<f64>,
    msg_rng: SeededRng,
    window: VecDeque<AuthOutcome>,
    slot: u64,
}

impl AuthEnv {
    pub fn reset(cfg: AuthConfig, seed: u64) -> Result<(Self, AuthObservation), AuthError> {
        cfg.validate()?;
        let mut init_rng = SeededRng::for_stream(seed, Stream::AuthInit);
        // Record components in [0.5, 1.5]: positive norm by construction.
        let record: Vec<f64> = (0..cfg.vec_len).map(|_| init_rng.uniform(0.5, 1.5)).collect();
        // Deterministic sign pattern models the spoofer's distinct location.
        let spoof_base: Vec<f64> = record
            .iter()
            .map(|&r| {
                let sign = if init_rng.chance(0.5) { 1.0 } else { -1.0 };
                r * (1.0 + sign * cfg.spoof_offset)
            })
            .collect();
        let env = AuthEnv {
            msg_rng: SeededRng::for_stream(seed, Stream::AuthMessages),
            record,
            spoof_base,
            window: VecDeque::with_capacity(cfg.window),
            slot: 0,
            cfg,
        };
        let obs = env.observation();
        Ok((env, obs))
    }

    pub fn config(&self) -> &AuthConfig {
        &self.cfg
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn record(&self) -> &[f64] {
        &self.record
    }

    fn observation(&self) -> AuthObservation {
        let (far, mdr) = rates(self.window.iter());
        let spoofed = self.window.iter().filter(|o| o.truth == Truth::Spoof).count();
        let freq = if self.window.is_empty() {
            0.0
        } else {
            spoofed as f64 / self.window.len() as f64
        };
        AuthObservation {
            recent_false_alarm_rate: far,
            recent_miss_rate: mdr,
            recent_spoof_freq: freq,
        }
    }

    /// Authenticate the next message with the grid threshold at
    /// `theta_index`. The message draw order (truth, then one noise draw
    /// per component) never depends on the chosen threshold, so runs with
    /// the same seed face identical message sequences under any policy.
    pub fn step(
        &mut self,
        theta_index: usize,
    ) -> Result<(AuthObservation, f64, AuthOutcome), AuthError> {
        if theta_index >= self.cfg.threshold_grid.len() {
            return Err(AuthError::ThresholdOutOfRange {
                index: theta_index,
                len: self.cfg.threshold_grid.len(),
            });
        }
        let theta = self.cfg.threshold_grid[theta_index];
        let p_spoof = self.cfg.spoof_prob_at(self.slot);
        let truth = if self.msg_rng.chance(p_spoof) { Truth::Spoof } else { Truth::Legit };
        let base = match truth {
            Truth::Legit => &self.record,
            Truth::Spoof => &self.spoof_base,
        };
        let sigma = self.cfg.legit_noise_sigma;
        let estimate: Vec<f64> =
            base.iter().map(|&b| b * (1.0 + sigma * self.msg_rng.normal())).collect();
        let statistic = test_statistic(&estimate, &self.record)?;
        let decision = decide(statistic, theta);
        let classification = Classification::of(decision, truth);
        let reward = match classification {
            Classification::TrueAccept | Classification::TrueReject => self.cfg.gain_correct,
            Classification::FalseAlarm => -self.cfg.cost_false_alarm,
            Classification::Miss => -self.cfg.cost_miss,
        };
        let outcome = AuthOutcome { statistic, decision, truth, classification };
        if self.window.len() == self.cfg.window {
            self.window.pop_front();
        }
        self.window.push_back(outcome);
        self.slot += 1;
        Ok((self.observation(), reward, outcome))
    }
}

/// Quantizers discretizing each observation field, in field order
/// (false-alarm rate, miss rate, spoof frequency).
pub fn observation_quantizers(bins: usize) -> Result<[Quantizer; 3], QuantError> {
    Ok([
        Quantizer::new(0.0, 1.0, bins)?,
        Quantizer::new(0.0, 1.0, bins)?,
        Quantizer::new(0.0, 1.0, bins)?,
    ])
}

/// Observation as unit-interval fields, for function approximation.
pub fn normalize_observation(obs: &AuthObservation) -> [f64; 3] {
    [
        obs.recent_false_alarm_rate,
        obs.recent_miss_rate,
        obs.recent_spoof_freq,
    ]
}
