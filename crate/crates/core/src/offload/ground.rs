//! Ground-truth state space of a frozen scenario and its exact enumeration
//! as an explicit MDP.
//!
//! A frozen scenario (exact observations, `none`/`sweep` jammer, battery
//! held full) is Markov in the tuple
//! `(device fading bins, jammer fading bins, bandwidth bin, density bin,
//! sweep phase)`. Fields are indexed row-major in that order, phase last.

use super::config::{JammerKind, OffloadAction, OffloadConfig, OffloadError};
use super::reward::{compute_breakdown, RewardBreakdown};
use crate::channel::ChannelModel;
use crate::oracle::{ExplicitMdp, DENSE_ENTRY_CEILING};
use crate::quant::{state_decode, state_index, state_space_size};

/// Decoded ground state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundState {
    pub device_bins: Vec<usize>,
    pub jam_bins: Vec<usize>,
    pub bw_bin: usize,
    pub density_bin: usize,
    pub phase: usize,
}

/// Mixed-radix layout of ground states.
#[derive(Clone, Debug)]
pub struct GroundLayout {
    num_edges: usize,
    radices: Vec<usize>,
    phase_cycle: usize,
}

impl GroundLayout {
    pub fn new(cfg: &OffloadConfig) -> Self {
        let e = cfg.num_edges;
        let phase_cycle = match cfg.jammer.kind {
            JammerKind::Sweep => cfg.jammer.sweep_period_slots * e,
            _ => 1,
        };
        let mut radices = Vec::with_capacity(2 * e + 3);
        radices.extend(std::iter::repeat_n(cfg.device_channel.levels(), e));
        radices.extend(std::iter::repeat_n(cfg.jam_channel.levels(), e));
        radices.push(cfg.bandwidth_levels_mhz.len());
        radices.push(cfg.user_density_levels.len());
        radices.push(phase_cycle);
        GroundLayout { num_edges: e, radices, phase_cycle }
    }

    pub fn states(&self) -> usize {
        state_space_size(&self.radices)
    }

    pub fn phase_cycle(&self) -> usize {
        self.phase_cycle
    }

    pub fn index(&self, state: &GroundState) -> usize {
        let mut fields = Vec::with_capacity(self.radices.len());
        fields.extend_from_slice(&state.device_bins);
        fields.extend_from_slice(&state.jam_bins);
        fields.push(state.bw_bin);
        fields.push(state.density_bin);
        fields.push(state.phase);
        state_index(&self.radices, &fields).expect("ground state within layout")
    }

    pub fn decode(&self, index: usize) -> GroundState {
        let fields = state_decode(&self.radices, index);
        let e = self.num_edges;
        GroundState {
            device_bins: fields[0..e].to_vec(),
            jam_bins: fields[e..2 * e].to_vec(),
            bw_bin: fields[2 * e],
            density_bin: fields[2 * e + 1],
            phase: fields[2 * e + 2],
        }
    }

    /// All chains at their middle bin, phase 0. Used as the canonical
    /// start for reachability walks.
    pub fn canonical_start(&self, cfg: &OffloadConfig) -> usize {
        let e = cfg.num_edges;
        self.index(&GroundState {
            device_bins: vec![cfg.device_channel.levels() / 2; e],
            jam_bins: vec![cfg.jam_channel.levels() / 2; e],
            bw_bin: cfg.bandwidth_levels_mhz.len() / 2,
            density_bin: cfg.user_density_levels.len() / 2,
            phase: 0,
        })
    }
}

/// Jammer beam target for a sweep phase; idle for `none`.
pub(crate) fn sweep_target(cfg: &OffloadConfig, phase: usize) -> Option<usize> {
    match cfg.jammer.kind {
        JammerKind::Sweep => Some(phase / cfg.jammer.sweep_period_slots),
        _ => None,
    }
}

/// Frozen-scenario view: exact rewards, post-decision mapping, and the
/// analytic transition structure shared by the environment and the
/// enumerator.
#[derive(Clone, Debug)]
pub struct FrozenGround {
    cfg: OffloadConfig,
    layout: GroundLayout,
    bw_rows: Vec<Vec<f64>>,
    density_rows: Vec<Vec<f64>>,
}

impl FrozenGround {
    pub fn new(cfg: &OffloadConfig) -> Result<Self, OffloadError> {
        cfg.validate()?;
        if !cfg.frozen {
            return Err(OffloadError::NotFrozen {
                reason: "the exact MDP is only meaningful with battery held full, \
                         exact observations and a schedule-driven jammer; set frozen = true"
                    .into(),
            });
        }
        let layout = GroundLayout::new(cfg);
        if layout.states() > cfg.state_ceiling {
            return Err(OffloadError::TooManyStates {
                states: layout.states(),
                ceiling: cfg.state_ceiling,
            });
        }
        Ok(FrozenGround {
            layout: layout.clone(),
            bw_rows: level_chain_rows(cfg.bandwidth_levels_mhz.len(), cfg.level_stay_prob),
            density_rows: level_chain_rows(cfg.user_density_levels.len(), cfg.level_stay_prob),
            cfg: cfg.clone(),
        })
    }

    pub fn layout(&self) -> &GroundLayout {
        &self.layout
    }

    pub fn config(&self) -> &OffloadConfig {
        &self.cfg
    }

    pub fn states(&self) -> usize {
        self.layout.states()
    }

    pub fn num_actions(&self) -> usize {
        self.cfg.num_actions()
    }

    pub fn canonical_start(&self) -> usize {
        self.layout.canonical_start(&self.cfg)
    }

    /// Deterministic slot outcome of (state, action); battery is full by
    /// frozen-mode definition.
    pub fn breakdown(&self, state: usize, action_index: usize) -> RewardBreakdown {
        let gs = self.layout.decode(state);
        let action = OffloadAction::from_index(&self.cfg, action_index);
        let edge = action.edge_index;
        let target = sweep_target(&self.cfg, gs.phase);
        compute_breakdown(
            &self.cfg,
            action,
            self.cfg.device_channel.gain(gs.device_bins[edge]),
            self.cfg.jammer.received_mw(edge, target),
            self.cfg.jam_channel.gain(gs.jam_bins[edge]),
            self.cfg.bandwidth_levels_mhz[gs.bw_bin],
            self.cfg.user_density_levels[gs.density_bin],
        )
    }

    /// Known reward component of the post-decision split: the whole slot
    /// reward, which is deterministic in frozen mode.
    pub fn known_reward(&self, state: usize, action_index: usize) -> f64 {
        self.breakdown(state, action_index).utility
    }

    /// Post-decision state: the deterministic factor of the transition
    /// (sweep phase advance); the fading chains move afterwards.
    pub fn post_decision(&self, state: usize, _action_index: usize) -> usize {
        let mut gs = self.layout.decode(state);
        gs.phase = (gs.phase + 1) % self.layout.phase_cycle;
        self.layout.index(&gs)
    }

    /// Exact transition tensor and expected-reward matrix.
    pub fn enumerate(&self, gamma: f64) -> Result<ExplicitMdp, OffloadError> {
        let states = self.states();
        let actions = self.num_actions();
        let entries = states * actions * states;
        if entries > DENSE_ENTRY_CEILING {
            return Err(OffloadError::TooManyStates {
                states: entries,
                ceiling: DENSE_ENTRY_CEILING,
            });
        }
        let decoded: Vec<GroundState> = (0..states).map(|s| self.layout.decode(s)).collect();
        let cycle = self.layout.phase_cycle;
        let mut transition = vec![0.0; entries];
        let mut reward = vec![0.0; states * actions];
        // The chains move independently of the action, so one next-state
        // distribution per state serves every action row.
        let mut row = vec![0.0; states];
        for (s, gs) in decoded.iter().enumerate() {
            row.iter_mut().for_each(|p| *p = 0.0);
            let next_phase = (gs.phase + 1) % cycle;
            // Phase is the last (stride-1) field: sweep the other fields.
            for prefix in 0..states / cycle {
                let s2 = prefix * cycle + next_phase;
                let ns = &decoded[s2];
                let mut p = self.bw_rows[gs.bw_bin][ns.bw_bin]
                    * self.density_rows[gs.density_bin][ns.density_bin];
                for e in 0..self.cfg.num_edges {
                    p *= self.cfg.device_channel.row(gs.device_bins[e])[ns.device_bins[e]];
                    if p == 0.0 {
                        break;
                    }
                    p *= self.cfg.jam_channel.row(gs.jam_bins[e])[ns.jam_bins[e]];
                    if p == 0.0 {
                        break;
                    }
                }
                row[s2] = p;
            }
            for a in 0..actions {
                reward[s * actions + a] = self.breakdown(s, a).utility;
                let base = (s * actions + a) * states;
                transition[base..base + states].copy_from_slice(&row);
            }
        }
        Ok(ExplicitMdp { states, actions, transition, reward, gamma })
    }
}

impl crate::agents::pds::PdsSplit for FrozenGround {
    fn pds_states(&self) -> usize {
        self.states()
    }
    fn num_actions(&self) -> usize {
        FrozenGround::num_actions(self)
    }
    fn known_reward(&self, state: usize, action: usize) -> f64 {
        FrozenGround::known_reward(self, state, action)
    }
    fn post_decision(&self, state: usize, action: usize) -> usize {
        FrozenGround::post_decision(self, state, action)
    }
}

/// Birth-death transition rows over `n` levels (uniform stationary law);
/// shared by the bandwidth and user-density processes.
pub(crate) fn level_chain_rows(n: usize, stay: f64) -> Vec<Vec<f64>> {
    // Levels need not be positive or distinct here, so ChannelModel's
    // validation does not apply; reuse its row structure.
    ChannelModel::birth_death((1..=n).map(|i| i as f64).collect(), stay)
        .expect("birth-death rows")
        .row_matrix()
}

/// Exact MDP of a frozen scenario.
pub fn enumerate_mdp(cfg: &OffloadConfig, gamma: f64) -> Result<ExplicitMdp, OffloadError> {
    FrozenGround::new(cfg)?.enumerate(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelModel;

    #[test]
    fn layout_roundtrip() {
        let cfg = OffloadConfig::frozen_scenario();
        let layout = GroundLayout::new(&cfg);
        assert_eq!(layout.states(), 4usize.pow(3) * 4 * 3);
        for s in 0..layout.states() {
            assert_eq!(layout.index(&layout.decode(s)), s);
        }
    }

    #[test]
    fn refuses_non_frozen() {
        let cfg = OffloadConfig::default();
        let err = enumerate_mdp(&cfg, 0.1).unwrap_err();
        assert!(matches!(err, OffloadError::NotFrozen { .. }));
        assert!(err.to_string().contains("frozen"));
    }

    #[test]
    fn refuses_oversized_scenarios() {
        let mut cfg = OffloadConfig::frozen_scenario();
        cfg.state_ceiling = 100;
        assert!(matches!(
            enumerate_mdp(&cfg, 0.1),
            Err(OffloadError::TooManyStates { states: 768, ceiling: 100 })
        ));
    }

    #[test]
    fn rows_are_stochastic() {
        let mdp = enumerate_mdp(&OffloadConfig::frozen_tiny(), 0.1).unwrap();
        mdp.validate().unwrap();
        for s in 0..mdp.states {
            for a in 0..mdp.actions {
                let sum: f64 = mdp.row(s, a).iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "row ({s}, {a}) sums to {sum}");
            }
        }
    }

    #[test]
    fn deterministic_chains_give_unit_rows() {
        let mut cfg = OffloadConfig::frozen_tiny();
        cfg.device_channel = ChannelModel::birth_death(vec![0.2], 0.6).unwrap();
        let mdp = enumerate_mdp(&cfg, 0.1).unwrap();
        for s in 0..mdp.states {
            for a in 0..mdp.actions {
                let row = mdp.row(s, a);
                let ones = row.iter().filter(|&&p| (p - 1.0).abs() < 1e-12).count();
                let zeros = row.iter().filter(|&&p| p == 0.0).count();
                assert_eq!(ones, 1);
                assert_eq!(zeros, mdp.states - 1);
            }
        }
    }

    #[test]
    fn sweep_target_follows_schedule() {
        let cfg = OffloadConfig::frozen_scenario();
        // Period 1 over 3 edges: phase == target.
        for phase in 0..3 {
            assert_eq!(sweep_target(&cfg, phase), Some(phase));
        }
        let mut cfg2 = OffloadConfig::default();
        cfg2.jammer.sweep_period_slots = 2;
        for (phase, want) in [(0, 0), (1, 0), (2, 1), (3, 1), (4, 2), (5, 2)] {
            assert_eq!(sweep_target(&cfg2, phase), Some(want));
        }
    }

    #[test]
    fn post_decision_advances_only_the_phase() {
        let ground = FrozenGround::new(&OffloadConfig::frozen_scenario()).unwrap();
        let s = ground.canonical_start();
        let before = ground.layout().decode(s);
        let after = ground.layout().decode(ground.post_decision(s, 3));
        assert_eq!(after.device_bins, before.device_bins);
        assert_eq!(after.bw_bin, before.bw_bin);
        assert_eq!(after.phase, (before.phase + 1) % ground.layout().phase_cycle());
    }
}
