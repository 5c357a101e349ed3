//! Scenario configuration for the anti-jamming offloading game.

use crate::channel::ChannelModel;
use crate::params::{AgentHyperparams, RewardWeights};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OffloadError {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("action out of range: edge {edge} of {num_edges}, rate {rate} of {num_rates}")]
    ActionOutOfRange { edge: usize, num_edges: usize, rate: usize, num_rates: usize },
    #[error("operation requires a frozen-mode config: {reason}")]
    NotFrozen { reason: String },
    #[error("frozen scenario has {states} ground states, above the {ceiling} ceiling")]
    TooManyStates { states: usize, ceiling: usize },
}

fn positive(field: &'static str, value: f64) -> Result<(), OffloadError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(OffloadError::InvalidConfig { field, reason: format!("{value} must be positive and finite") })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), OffloadError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(OffloadError::InvalidConfig { field, reason: format!("{value} must be >= 0 and finite") })
    }
}

/// Attacker behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JammerKind {
    /// No jamming; the interference term is always zero.
    None,
    /// Cycles its beam over the edges: targets edge (t / period) mod E.
    Sweep,
    /// Tabular Q-learner choosing between idling and jamming one edge.
    Smart,
}

/// Learning attacker parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SmartJammerConfig {
    pub hyper: AgentHyperparams,
    /// Per-slot cost of staying idle.
    pub idle_cost: f64,
    /// Per-slot cost of actively jamming.
    pub jam_cost: f64,
}

impl Default for SmartJammerConfig {
    fn default() -> Self {
        SmartJammerConfig { hyper: AgentHyperparams::default(), idle_cost: 0.0, jam_cost: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JammerConfig {
    pub kind: JammerKind,
    /// Transmit power of the jammer.
    pub jam_power_mw: f64,
    /// Slots the sweep dwells on one edge before moving on.
    pub sweep_period_slots: usize,
    /// Jammer-to-edge distances in meters, one per edge.
    pub distance_to_edge_m: Vec<f64>,
    /// Received jam power scales as distance^(-path_loss_exp).
    pub path_loss_exp: f64,
    /// Fraction of the beam power leaking to non-targeted edges.
    pub spillover: f64,
    pub smart: SmartJammerConfig,
}

impl Default for JammerConfig {
    fn default() -> Self {
        JammerConfig {
            kind: JammerKind::Sweep,
            jam_power_mw: 20_000.0,
            sweep_period_slots: 2,
            distance_to_edge_m: vec![20.0, 25.0, 33.0],
            path_loss_exp: 2.0,
            spillover: 0.05,
            smart: SmartJammerConfig::default(),
        }
    }
}

impl JammerConfig {
    /// Jam power arriving at `edge` while the beam targets `target`
    /// (before link fading). `None` target means the jammer is idle.
    pub fn received_mw(&self, edge: usize, target: Option<usize>) -> f64 {
        let Some(target) = target else { return 0.0 };
        let attenuation = self.distance_to_edge_m[edge].powf(-self.path_loss_exp);
        let beam = if edge == target { 1.0 } else { self.spillover };
        self.jam_power_mw * attenuation * beam
    }

    /// Largest received jam power over edges at full beam gain.
    pub fn received_bound_mw(&self) -> f64 {
        self.distance_to_edge_m
            .iter()
            .map(|d| self.jam_power_mw * d.powf(-self.path_loss_exp))
            .fold(0.0, f64::max)
    }
}

/// Full scenario description for the offloading game.
#[derive(Clone, Debug, PartialEq)]
pub struct OffloadConfig {
    pub num_edges: usize,
    /// Offload fraction takes values {0, 1/(R-1), ..., 1}.
    pub num_rate_levels: usize,
    pub tx_power_mw: f64,
    pub noise_mw: f64,
    /// Computation task arriving each slot.
    pub task_bits: u64,
    pub cpu_cycles_per_bit: u64,
    pub local_cpu_hz: f64,
    pub edge_cpu_hz: f64,
    /// Spectral efficiency per unit of log2(1 + sinr).
    pub link_rate_bps_per_hz: f64,
    pub bandwidth_levels_mhz: Vec<f64>,
    pub energy_per_cycle_j: f64,
    pub battery_capacity_j: f64,
    pub user_density_levels: Vec<f64>,
    /// Stay probability of the bandwidth and density birth-death chains.
    pub level_stay_prob: f64,
    pub weights: RewardWeights,
    pub jammer: JammerConfig,
    /// Fading on every device-to-edge link (one independent chain per edge).
    pub device_channel: ChannelModel,
    /// Fading on every jammer-to-edge link (one independent chain per edge).
    pub jam_channel: ChannelModel,
    /// Relative std-dev of multiplicative observation noise; 0 disables.
    pub obs_noise_sigma: f64,
    /// Observations lag ground truth by this many slots.
    pub obs_delay_slots: usize,
    /// Failed-transmission timeout as a multiple of the full local compute time.
    pub txfail_timeout_factor: f64,
    /// Frozen mode: battery held full, enumerable ground-truth MDP.
    pub frozen: bool,
    /// Refuse to enumerate more ground states than this.
    pub state_ceiling: usize,
}

impl Default for OffloadConfig {
    fn default() -> Self {
        OffloadConfig {
            num_edges: 3,
            num_rate_levels: 4,
            tx_power_mw: 100.0,
            noise_mw: 1.0,
            task_bits: 500_000,
            cpu_cycles_per_bit: 1000,
            local_cpu_hz: 1e9,
            edge_cpu_hz: 1e10,
            link_rate_bps_per_hz: 1.0,
            bandwidth_levels_mhz: vec![2.0, 4.0, 6.0, 8.0],
            energy_per_cycle_j: 1e-9,
            battery_capacity_j: 10_000.0,
            user_density_levels: vec![0.0, 1.0, 2.0, 3.0],
            level_stay_prob: 0.6,
            weights: RewardWeights::default(),
            jammer: JammerConfig::default(),
            device_channel: ChannelModel::birth_death(vec![0.05, 0.1, 0.2, 0.4], 0.6)
                .expect("default device channel"),
            jam_channel: ChannelModel::birth_death(vec![0.5, 1.0], 0.6)
                .expect("default jam channel"),
            obs_noise_sigma: 0.0,
            obs_delay_slots: 0,
            txfail_timeout_factor: 2.0,
            frozen: false,
            state_ceiling: 100_000,
        }
    }
}

impl OffloadConfig {
    /// Frozen variant of the default scenario, small enough to enumerate:
    /// single-level jammer fading, one-slot sweep dwell, fixed user density.
    /// 4^3 device-fading combinations x 4 bandwidth levels x 3 sweep phases
    /// = 768 ground states with 12 actions.
    pub fn frozen_scenario() -> Self {
        let mut cfg = OffloadConfig::default();
        cfg.frozen = true;
        cfg.jam_channel = ChannelModel::birth_death(vec![1.0], 0.6).expect("degenerate chain");
        cfg.jammer.sweep_period_slots = 1;
        cfg.user_density_levels = vec![1.0];
        cfg
    }

    /// Tiny frozen scenario for statistical cross-checks: 2 edges,
    /// 2-level device fading, everything else degenerate. 4 device-fading
    /// combinations x 2 sweep phases = 8 ground states with 4 actions.
    pub fn frozen_tiny() -> Self {
        let mut cfg = Self::frozen_scenario();
        cfg.num_edges = 2;
        cfg.num_rate_levels = 2;
        cfg.device_channel = ChannelModel::birth_death(vec![0.1, 0.4], 0.6).expect("chain");
        cfg.bandwidth_levels_mhz = vec![4.0];
        cfg.jammer.distance_to_edge_m = vec![20.0, 25.0];
        cfg
    }

    pub fn validate(&self) -> Result<(), OffloadError> {
        if self.num_edges == 0 {
            return Err(OffloadError::InvalidConfig {
                field: "num_edges",
                reason: "must be at least 1".into(),
            });
        }
        if self.num_rate_levels < 2 {
            return Err(OffloadError::InvalidConfig {
                field: "num_rate_levels",
                reason: "must be at least 2".into(),
            });
        }
        positive("tx_power_mw", self.tx_power_mw)?;
        positive("noise_mw", self.noise_mw)?;
        if self.task_bits == 0 {
            return Err(OffloadError::InvalidConfig {
                field: "task_bits",
                reason: "must be positive".into(),
            });
        }
        if self.cpu_cycles_per_bit == 0 {
            return Err(OffloadError::InvalidConfig {
                field: "cpu_cycles_per_bit",
                reason: "must be positive".into(),
            });
        }
        positive("local_cpu_hz", self.local_cpu_hz)?;
        positive("edge_cpu_hz", self.edge_cpu_hz)?;
        positive("link_rate_bps_per_hz", self.link_rate_bps_per_hz)?;
        if self.bandwidth_levels_mhz.is_empty() {
            return Err(OffloadError::InvalidConfig {
                field: "bandwidth_levels_mhz",
                reason: "must list at least one level".into(),
            });
        }
        for &b in &self.bandwidth_levels_mhz {
            positive("bandwidth_levels_mhz", b)?;
        }
        non_negative("energy_per_cycle_j", self.energy_per_cycle_j)?;
        positive("battery_capacity_j", self.battery_capacity_j)?;
        if self.user_density_levels.is_empty() {
            return Err(OffloadError::InvalidConfig {
                field: "user_density_levels",
                reason: "must list at least one level".into(),
            });
        }
        for &d in &self.user_density_levels {
            non_negative("user_density_levels", d)?;
        }
        if !(self.level_stay_prob > 0.0 && self.level_stay_prob <= 1.0) {
            return Err(OffloadError::InvalidConfig {
                field: "level_stay_prob",
                reason: format!("{} must be in (0, 1]", self.level_stay_prob),
            });
        }
        self.weights.validate().map_err(|e| OffloadError::InvalidConfig {
            field: "weights",
            reason: e.to_string(),
        })?;
        non_negative("jammer.jam_power_mw", self.jammer.jam_power_mw)?;
        if self.jammer.sweep_period_slots == 0 {
            return Err(OffloadError::InvalidConfig {
                field: "jammer.sweep_period_slots",
                reason: "must be positive".into(),
            });
        }
        if self.jammer.distance_to_edge_m.len() != self.num_edges {
            return Err(OffloadError::InvalidConfig {
                field: "jammer.distance_to_edge_m",
                reason: format!(
                    "needs one distance per edge ({} edges, {} distances)",
                    self.num_edges,
                    self.jammer.distance_to_edge_m.len()
                ),
            });
        }
        for &d in &self.jammer.distance_to_edge_m {
            positive("jammer.distance_to_edge_m", d)?;
        }
        positive("jammer.path_loss_exp", self.jammer.path_loss_exp)?;
        if !(0.0..=1.0).contains(&self.jammer.spillover) {
            return Err(OffloadError::InvalidConfig {
                field: "jammer.spillover",
                reason: format!("{} must be in [0, 1]", self.jammer.spillover),
            });
        }
        self.jammer.smart.hyper.validate().map_err(|e| OffloadError::InvalidConfig {
            field: "jammer.smart",
            reason: e.to_string(),
        })?;
        non_negative("jammer.smart.idle_cost", self.jammer.smart.idle_cost)?;
        non_negative("jammer.smart.jam_cost", self.jammer.smart.jam_cost)?;
        non_negative("obs_noise_sigma", self.obs_noise_sigma)?;
        positive("txfail_timeout_factor", self.txfail_timeout_factor)?;
        if self.frozen {
            if self.obs_noise_sigma != 0.0 {
                return Err(OffloadError::InvalidConfig {
                    field: "obs_noise_sigma",
                    reason: "frozen mode requires exact observations".into(),
                });
            }
            if self.obs_delay_slots != 0 {
                return Err(OffloadError::InvalidConfig {
                    field: "obs_delay_slots",
                    reason: "frozen mode requires undelayed observations".into(),
                });
            }
            if self.jammer.kind == JammerKind::Smart {
                return Err(OffloadError::InvalidConfig {
                    field: "jammer.kind",
                    reason: "frozen mode supports only `none` and `sweep` jammers".into(),
                });
            }
        }
        Ok(())
    }

    /// Action-set size: edge-major, rate-minor enumeration.
    pub fn num_actions(&self) -> usize {
        self.num_edges * self.num_rate_levels
    }

    /// Full local compute time for one task, in seconds.
    pub fn local_compute_s(&self) -> f64 {
        (self.task_bits as f64) * (self.cpu_cycles_per_bit as f64) / self.local_cpu_hz
    }

    /// Full local compute energy for one task, in joules.
    pub fn local_compute_j(&self) -> f64 {
        (self.task_bits as f64) * (self.cpu_cycles_per_bit as f64) * self.energy_per_cycle_j
    }
}

/// Edge selection plus offloading-rate level. Rate level 0 means fully
/// local computation; the edge index then only names the sensed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OffloadAction {
    pub edge_index: usize,
    pub rate_level: usize,
}

impl OffloadAction {
    /// Flat index in the documented edge-major, rate-minor order.
    pub fn index(&self, cfg: &OffloadConfig) -> usize {
        self.edge_index * cfg.num_rate_levels + self.rate_level
    }

    pub fn from_index(cfg: &OffloadConfig, index: usize) -> Self {
        OffloadAction {
            edge_index: index / cfg.num_rate_levels,
            rate_level: index % cfg.num_rate_levels,
        }
    }

    pub fn validate(&self, cfg: &OffloadConfig) -> Result<(), OffloadError> {
        if self.edge_index >= cfg.num_edges || self.rate_level >= cfg.num_rate_levels {
            return Err(OffloadError::ActionOutOfRange {
                edge: self.edge_index,
                num_edges: cfg.num_edges,
                rate: self.rate_level,
                num_rates: cfg.num_rate_levels,
            });
        }
        Ok(())
    }

    /// Offloaded fraction of the task.
    pub fn fraction(&self, cfg: &OffloadConfig) -> f64 {
        self.rate_level as f64 / (cfg.num_rate_levels - 1) as f64
    }
}
