//! Discrete-time anti-jamming offloading game.

use std::collections::VecDeque;

use super::config::{JammerKind, OffloadAction, OffloadConfig, OffloadError};
use super::ground::{level_chain_rows, sweep_target, FrozenGround, GroundLayout, GroundState};
use super::reward::{compute_breakdown, RewardBreakdown};
use crate::agents::qtable::{epsilon_greedy, QTable};
use crate::params::EpsilonSchedule;
use crate::quant::{QuantError, Quantizer};
use crate::rng::{SeededRng, Stream};

/// The four quantities the defender observes each slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotObservation {
    /// Jam power received at the sensed edge during the previous slot.
    pub jam_power_mw: f64,
    pub bandwidth_mhz: f64,
    pub battery_frac: f64,
    pub user_density: f64,
}

/// Learning attacker: picks idle or one edge to jam, rewarded by the
/// negated defender utility minus its action cost.
#[derive(Clone, Debug)]
struct SmartJammer {
    table: QTable,
    schedule: EpsilonSchedule,
    gamma: f64,
    alpha: f64,
    rng: SeededRng,
    /// Last sensed defender edge, or `num_edges` when it did not transmit.
    obs_state: usize,
}

impl SmartJammer {
    fn new(cfg: &OffloadConfig, seed: u64) -> Self {
        let hp = cfg.jammer.smart.hyper;
        SmartJammer {
            // States: sensed edge or silence; actions: idle or jam edge e.
            table: QTable::new(cfg.num_edges + 1, cfg.num_edges + 1),
            schedule: EpsilonSchedule::new(&hp),
            gamma: hp.gamma,
            alpha: hp.alpha,
            rng: SeededRng::for_stream(seed, Stream::Jammer),
            obs_state: cfg.num_edges,
        }
    }

    fn choose(&mut self) -> usize {
        let eps = self.schedule.step();
        epsilon_greedy(self.table.row(self.obs_state), eps, &mut self.rng)
    }

    fn learn(&mut self, action: usize, reward: f64, next_obs: usize) {
        self.table
            .update_with_alpha(self.obs_state, action, reward, next_obs, self.alpha, self.gamma)
            .expect("jammer indices in range");
        self.obs_state = next_obs;
    }
}

/// Single-owner environment handle.
#[derive(Clone, Debug)]
pub struct OffloadEnv {
    cfg: OffloadConfig,
    bw_rows: Vec<Vec<f64>>,
    density_rows: Vec<Vec<f64>>,
    device_bins: Vec<usize>,
    jam_bins: Vec<usize>,
    bw_bin: usize,
    density_bin: usize,
    battery_j: f64,
    slot: u64,
    phase_cycle: usize,
    chan_rng: SeededRng,
    noise_rng: SeededRng,
    smart: Option<SmartJammer>,
    /// Truth observations pending release when obs_delay_slots > 0.
    truth_buf: VecDeque<SlotObservation>,
}

impl OffloadEnv {
    /// Validate the config and initialize slot 0: chains start at bins
    /// drawn from their (uniform) stationary law, battery full, no jamming
    /// sensed yet.
    pub fn reset(cfg: OffloadConfig, seed: u64) -> Result<(Self, SlotObservation), OffloadError> {
        cfg.validate()?;
        let mut start_rng = SeededRng::for_stream(seed, Stream::OffloadStart);
        let e = cfg.num_edges;
        let device_bins: Vec<usize> =
            (0..e).map(|_| start_rng.next_below(cfg.device_channel.levels())).collect();
        let jam_bins: Vec<usize> =
            (0..e).map(|_| start_rng.next_below(cfg.jam_channel.levels())).collect();
        let bw_bin = start_rng.next_below(cfg.bandwidth_levels_mhz.len());
        let density_bin = start_rng.next_below(cfg.user_density_levels.len());
        let smart = match cfg.jammer.kind {
            JammerKind::Smart => Some(SmartJammer::new(&cfg, seed)),
            _ => None,
        };
        let phase_cycle = GroundLayout::new(&cfg).phase_cycle();
        let mut env = OffloadEnv {
            bw_rows: level_chain_rows(cfg.bandwidth_levels_mhz.len(), cfg.level_stay_prob),
            density_rows: level_chain_rows(cfg.user_density_levels.len(), cfg.level_stay_prob),
            device_bins,
            jam_bins,
            bw_bin,
            density_bin,
            battery_j: cfg.battery_capacity_j,
            slot: 0,
            phase_cycle,
            chan_rng: SeededRng::for_stream(seed, Stream::OffloadChannels),
            noise_rng: SeededRng::for_stream(seed, Stream::OffloadObsNoise),
            smart,
            truth_buf: VecDeque::new(),
            cfg,
        };
        let initial = env.truth_observation(0.0);
        env.truth_buf.push_back(initial);
        let obs = env.emit_observation();
        Ok((env, obs))
    }

    pub fn config(&self) -> &OffloadConfig {
        &self.cfg
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn battery_frac(&self) -> f64 {
        self.battery_j / self.cfg.battery_capacity_j
    }

    /// Index of the current ground state; only meaningful in frozen mode.
    pub fn ground_state_index(&self, ground: &FrozenGround) -> usize {
        ground.layout().index(&GroundState {
            device_bins: self.device_bins.clone(),
            jam_bins: self.jam_bins.clone(),
            bw_bin: self.bw_bin,
            density_bin: self.density_bin,
            phase: (self.slot % self.phase_cycle as u64) as usize,
        })
    }

    /// Advance one slot: the jammer picks its target, the slot outcome is
    /// scored against the current ground state, then every chain moves.
    /// Returns the next (possibly delayed/noisy) observation and the
    /// reward breakdown of this slot.
    pub fn step(
        &mut self,
        action: OffloadAction,
    ) -> Result<(SlotObservation, RewardBreakdown), OffloadError> {
        action.validate(&self.cfg)?;
        // An empty battery forces fully local computation.
        let effective = if self.battery_j <= 0.0 {
            OffloadAction { edge_index: action.edge_index, rate_level: 0 }
        } else {
            action
        };

        let jam_action = self.smart.as_mut().map(|j| j.choose());
        let target = match self.cfg.jammer.kind {
            JammerKind::None => None,
            JammerKind::Sweep => {
                sweep_target(&self.cfg, (self.slot % self.phase_cycle as u64) as usize)
            }
            JammerKind::Smart => match jam_action {
                Some(0) | None => None,
                Some(a) => Some(a - 1),
            },
        };

        let edge = effective.edge_index;
        let jam_received = self.cfg.jammer.received_mw(edge, target);
        let jam_gain = self.cfg.jam_channel.gain(self.jam_bins[edge]);
        let breakdown = compute_breakdown(
            &self.cfg,
            effective,
            self.cfg.device_channel.gain(self.device_bins[edge]),
            jam_received,
            jam_gain,
            self.cfg.bandwidth_levels_mhz[self.bw_bin],
            self.cfg.user_density_levels[self.density_bin],
        );
        // What the defender senses at its edge this slot, reported in the
        // next observation.
        let sensed_jam = jam_received * jam_gain;

        if let (Some(jammer), Some(jam_act)) = (self.smart.as_mut(), jam_action) {
            let cost = if jam_act == 0 {
                self.cfg.jammer.smart.idle_cost
            } else {
                self.cfg.jammer.smart.jam_cost
            };
            let next_obs = if effective.rate_level > 0 { edge } else { self.cfg.num_edges };
            jammer.learn(jam_act, -breakdown.utility - cost, next_obs);
        }

        if !self.cfg.frozen {
            self.battery_j = (self.battery_j - breakdown.energy_j).max(0.0);
        }

        // Chains advance in a fixed order; the draw count per slot never
        // depends on the action.
        for e in 0..self.cfg.num_edges {
            self.device_bins[e] = self.cfg.device_channel.step(self.device_bins[e], &mut self.chan_rng);
        }
        for e in 0..self.cfg.num_edges {
            self.jam_bins[e] = self.cfg.jam_channel.step(self.jam_bins[e], &mut self.chan_rng);
        }
        self.bw_bin = self.chan_rng.sample_discrete(&self.bw_rows[self.bw_bin]);
        self.density_bin = self.chan_rng.sample_discrete(&self.density_rows[self.density_bin]);
        self.slot += 1;

        let truth = self.truth_observation(sensed_jam);
        self.truth_buf.push_back(truth);
        if self.truth_buf.len() > self.cfg.obs_delay_slots + 1 {
            self.truth_buf.pop_front();
        }
        Ok((self.emit_observation(), breakdown))
    }

    fn truth_observation(&self, sensed_jam_mw: f64) -> SlotObservation {
        SlotObservation {
            jam_power_mw: sensed_jam_mw,
            bandwidth_mhz: self.cfg.bandwidth_levels_mhz[self.bw_bin],
            battery_frac: self.battery_frac(),
            user_density: self.cfg.user_density_levels[self.density_bin],
        }
    }

    /// Oldest buffered truth (lagging by obs_delay_slots once warmed up),
    /// perturbed when observation noise is enabled.
    fn emit_observation(&mut self) -> SlotObservation {
        let mut obs = *self.truth_buf.front().expect("buffer never empty");
        let sigma = self.cfg.obs_noise_sigma;
        if sigma > 0.0 {
            let mut perturb = |x: f64| x * (1.0 + sigma * self.noise_rng.normal());
            obs.jam_power_mw = perturb(obs.jam_power_mw).max(0.0);
            obs.bandwidth_mhz = perturb(obs.bandwidth_mhz).max(f64::MIN_POSITIVE);
            obs.battery_frac = perturb(obs.battery_frac).clamp(0.0, 1.0);
            obs.user_density = perturb(obs.user_density).max(0.0);
        }
        obs
    }
}

/// Quantizers discretizing each observation field, in field order
/// (jam power, bandwidth, battery, density).
pub fn observation_quantizers(
    cfg: &OffloadConfig,
    bins: usize,
) -> Result<[Quantizer; 4], QuantError> {
    let (jam_lo, jam_hi) = padded_range(0.0, observed_jam_bound(cfg));
    let (bw_lo, bw_hi) = padded_span(&cfg.bandwidth_levels_mhz);
    let (de_lo, de_hi) = padded_span(&cfg.user_density_levels);
    Ok([
        Quantizer::new(jam_lo, jam_hi, bins)?,
        Quantizer::new(bw_lo, bw_hi, bins)?,
        Quantizer::new(0.0, 1.0, bins)?,
        Quantizer::new(de_lo, de_hi, bins)?,
    ])
}

/// Observation scaled to [0, 1] per field, for function approximation.
pub fn normalize_observation(cfg: &OffloadConfig, obs: &SlotObservation) -> [f64; 4] {
    let (jam_lo, jam_hi) = padded_range(0.0, observed_jam_bound(cfg));
    let (bw_lo, bw_hi) = padded_span(&cfg.bandwidth_levels_mhz);
    let (de_lo, de_hi) = padded_span(&cfg.user_density_levels);
    let unit = |x: f64, lo: f64, hi: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    [
        unit(obs.jam_power_mw, jam_lo, jam_hi),
        unit(obs.bandwidth_mhz, bw_lo, bw_hi),
        obs.battery_frac.clamp(0.0, 1.0),
        unit(obs.user_density, de_lo, de_hi),
    ]
}

/// Largest jam power the defender can sense (full beam, best fading).
fn observed_jam_bound(cfg: &OffloadConfig) -> f64 {
    let max_gain = cfg
        .jam_channel
        .gain_levels()
        .last()
        .copied()
        .unwrap_or(1.0);
    cfg.jammer.received_bound_mw() * max_gain
}

fn padded_span(levels: &[f64]) -> (f64, f64) {
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    padded_range(lo, hi)
}

/// Widen degenerate ranges so Quantizer construction always succeeds.
fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}
