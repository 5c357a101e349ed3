//! Experiment configuration: a flat `key = value` text format with dotted
//! section names, `#` comments, and strict key checking — unknown keys are
//! errors, so typos never silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use mecrl_core::agents::{AlphaMode, DqnConfig};
use mecrl_core::auth::AuthConfig;
use mecrl_core::channel::ChannelModel;
use mecrl_core::offload::{JammerKind, OffloadConfig};
use mecrl_core::params::{AgentHyperparams, RewardWeights};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("key `{key}`: {reason}")]
    Validation { key: String, reason: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Offload,
    Auth,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Offload => "offload",
            Scenario::Auth => "auth",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentKind {
    Random,
    Fixed,
    QLearn,
    DynaQ,
    Pds,
    Dqn,
    DqnHotboot,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Fixed => "fixed",
            AgentKind::QLearn => "qlearn",
            AgentKind::DynaQ => "dynaq",
            AgentKind::Pds => "pds",
            AgentKind::Dqn => "dqn",
            AgentKind::DqnHotboot => "dqn-hotboot",
        }
    }

    /// Baselines play a fixed policy; learning time is meaningless for
    /// them.
    pub fn is_learner(self) -> bool {
        !matches!(self, AgentKind::Random | AgentKind::Fixed)
    }
}

/// Raw fading knobs kept alongside the built models so pretraining can
/// rebuild perturbed variants.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelKnobs {
    pub device_gain_levels: Vec<f64>,
    pub device_stay_prob: f64,
    pub jam_gain_levels: Vec<f64>,
    pub jam_stay_prob: f64,
}

impl Default for ChannelKnobs {
    fn default() -> Self {
        ChannelKnobs {
            device_gain_levels: vec![0.05, 0.1, 0.2, 0.4],
            device_stay_prob: 0.6,
            jam_gain_levels: vec![0.5, 1.0],
            jam_stay_prob: 0.6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentOptions {
    pub hyper: AgentHyperparams,
    pub alpha_mode: AlphaMode,
    pub planning_steps: usize,
    /// Quantizer bins per observation field for tabular agents.
    pub obs_bins: usize,
    pub dqn: DqnConfig,
    pub hotboot_weights: Option<PathBuf>,
    /// Pin the fixed baseline to one action index instead of picking the
    /// best static action in hindsight.
    pub fixed_action: Option<usize>,
}

impl Default for AgentOptions {
    fn default() -> Self {
        AgentOptions {
            hyper: AgentHyperparams::default(),
            alpha_mode: AlphaMode::Fixed,
            planning_steps: 10,
            obs_bins: 4,
            dqn: DqnConfig::default(),
            hotboot_weights: None,
            fixed_action: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainOptions {
    pub scenarios: usize,
    pub slots_per_scenario: u64,
    pub workers: usize,
    pub jam_power_jitter: f64,
    pub stay_prob_jitter: f64,
    pub seed: u64,
}

impl Default for PretrainOptions {
    fn default() -> Self {
        PretrainOptions {
            scenarios: 4,
            slots_per_scenario: 3000,
            workers: 1,
            jam_power_jitter: 0.2,
            stay_prob_jitter: 0.2,
            seed: 9001,
        }
    }
}

/// Everything one experiment needs: scenario, agent, run shape, and both
/// environment configurations (only the selected scenario's is used).
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub agent: AgentKind,
    pub slots: u64,
    pub runs: u64,
    /// Run i draws every stream from base_seed + i.
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub agent_opts: AgentOptions,
    pub offload: OffloadConfig,
    pub channel_knobs: ChannelKnobs,
    pub auth: AuthConfig,
    pub pretrain: PretrainOptions,
    /// Fraction of seeds an ordering must hold in for `compare` to pass.
    pub compare_min_seed_frac: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::Offload,
            agent: AgentKind::QLearn,
            slots: 10_000,
            runs: 10,
            base_seed: 1,
            out_dir: PathBuf::from("out"),
            agent_opts: AgentOptions::default(),
            offload: OffloadConfig::default(),
            channel_knobs: ChannelKnobs::default(),
            auth: AuthConfig::default(),
            pretrain: PretrainOptions::default(),
            compare_min_seed_frac: 0.8,
        }
    }
}

impl ExperimentConfig {
    pub fn default_for(scenario: Scenario) -> Self {
        ExperimentConfig { scenario, ..Default::default() }
    }

    /// Rebuild the offload channel models from the raw knobs (used after
    /// pretraining perturbs them).
    pub fn rebuild_channels(&mut self) -> Result<(), ConfigError> {
        self.offload.device_channel = ChannelModel::birth_death(
            self.channel_knobs.device_gain_levels.clone(),
            self.channel_knobs.device_stay_prob,
        )
        .map_err(|e| ConfigError::Validation {
            key: "offload.device_gain_levels".into(),
            reason: e.to_string(),
        })?;
        self.offload.jam_channel = ChannelModel::birth_death(
            self.channel_knobs.jam_gain_levels.clone(),
            self.channel_knobs.jam_stay_prob,
        )
        .map_err(|e| ConfigError::Validation {
            key: "offload.jam_gain_levels".into(),
            reason: e.to_string(),
        })?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.runs == 0 {
            return Err(ConfigError::Validation {
                key: "runs".into(),
                reason: "must run at least once".into(),
            });
        }
        if self.agent_opts.obs_bins < 2 {
            return Err(ConfigError::Validation {
                key: "agent.obs_bins".into(),
                reason: "need at least 2 bins per field".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.compare_min_seed_frac) {
            return Err(ConfigError::Validation {
                key: "compare.min_seed_frac".into(),
                reason: "must be in [0, 1]".into(),
            });
        }
        self.agent_opts.hyper.validate().map_err(|e| ConfigError::Validation {
            key: "agent".into(),
            reason: e.to_string(),
        })?;
        match self.scenario {
            Scenario::Offload => {
                self.offload.validate().map_err(|e| ConfigError::Validation {
                    key: "offload".into(),
                    reason: e.to_string(),
                })?;
                if let Some(a) = self.agent_opts.fixed_action {
                    if a >= self.offload.num_actions() {
                        return Err(ConfigError::Validation {
                            key: "agent.fixed_action".into(),
                            reason: format!(
                                "{a} out of range for {} actions",
                                self.offload.num_actions()
                            ),
                        });
                    }
                }
                if self.agent == AgentKind::Pds && !self.offload.frozen {
                    return Err(ConfigError::Validation {
                        key: "agent".into(),
                        reason: "the pds agent needs the known-dynamics split that only \
                                 frozen offload scenarios expose (offload.frozen = true)"
                            .into(),
                    });
                }
            }
            Scenario::Auth => {
                self.auth.validate().map_err(|e| ConfigError::Validation {
                    key: "auth".into(),
                    reason: e.to_string(),
                })?;
                if let Some(a) = self.agent_opts.fixed_action {
                    if a >= self.auth.threshold_grid.len() {
                        return Err(ConfigError::Validation {
                            key: "agent.fixed_action".into(),
                            reason: format!(
                                "{a} out of range for {} thresholds",
                                self.auth.threshold_grid.len()
                            ),
                        });
                    }
                }
                if self.agent == AgentKind::Pds {
                    return Err(ConfigError::Validation {
                        key: "agent".into(),
                        reason: "the auth scenario exposes no known-dynamics split".into(),
                    });
                }
            }
        }
        if self.agent == AgentKind::DqnHotboot {
            match &self.agent_opts.hotboot_weights {
                None => {
                    return Err(ConfigError::Validation {
                        key: "agent.hotboot_weights".into(),
                        reason: "dqn-hotboot needs a pretrained weights file".into(),
                    })
                }
                Some(path) => {
                    if !path.exists() {
                        return Err(ConfigError::Validation {
                            key: "agent.hotboot_weights".into(),
                            reason: format!("file `{}` does not exist", path.display()),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_schedule(schedule: &[(u64, f64)]) -> String {
    schedule.iter().map(|(s, p)| format!("{s}:{p}")).collect::<Vec<_>>().join(",")
}

/// The complete documented key set with its defaults, as loadable text.
pub fn print_default_config(scenario: Scenario) -> String {
    let d = ExperimentConfig::default_for(scenario);
    let mut s = String::new();
    let _ = writeln!(s, "# Experiment configuration ({} scenario defaults).", scenario.name());
    let _ = writeln!(s, "# Flat `key = value` lines; `#` starts a comment; every key is");
    let _ = writeln!(s, "# listed below - unknown keys are rejected.");
    let _ = writeln!(s);
    let _ = writeln!(s, "scenario = {}", d.scenario.name());
    let _ = writeln!(s, "# one of: random, fixed, qlearn, dynaq, pds, dqn, dqn-hotboot");
    let _ = writeln!(s, "agent = {}", d.agent.name());
    let _ = writeln!(s, "slots = {}", d.slots);
    let _ = writeln!(s, "runs = {}", d.runs);
    let _ = writeln!(s, "# run i uses base_seed + i");
    let _ = writeln!(s, "base_seed = {}", d.base_seed);
    let _ = writeln!(s, "out = {}", d.out_dir.display());
    let _ = writeln!(s);
    let _ = writeln!(s, "# Learning parameters.");
    let _ = writeln!(s, "agent.alpha = {}", d.agent_opts.hyper.alpha);
    let _ = writeln!(s, "agent.gamma = {}", d.agent_opts.hyper.gamma);
    let _ = writeln!(s, "agent.epsilon0 = {}", d.agent_opts.hyper.epsilon0);
    let _ = writeln!(s, "agent.epsilon_min = {}", d.agent_opts.hyper.epsilon_min);
    let _ = writeln!(s, "agent.epsilon_decay = {}", d.agent_opts.hyper.epsilon_decay);
    let _ = writeln!(s, "# fixed | visit-decay (per-pair decaying learning rate)");
    let _ = writeln!(s, "agent.alpha_mode = fixed");
    let _ = writeln!(s, "agent.planning_steps = {}", d.agent_opts.planning_steps);
    let _ = writeln!(s, "agent.obs_bins = {}", d.agent_opts.obs_bins);
    let _ = writeln!(s, "agent.window = {}", d.agent_opts.dqn.window);
    let _ = writeln!(s, "agent.conv1_filters = {}", d.agent_opts.dqn.conv1_filters);
    let _ = writeln!(s, "agent.conv1_kernel = {}", d.agent_opts.dqn.conv1_kernel);
    let _ = writeln!(s, "agent.conv2_filters = {}", d.agent_opts.dqn.conv2_filters);
    let _ = writeln!(s, "agent.conv2_kernel = {}", d.agent_opts.dqn.conv2_kernel);
    let _ = writeln!(s, "agent.hidden = {}", d.agent_opts.dqn.hidden);
    let _ = writeln!(s, "agent.replay_capacity = {}", d.agent_opts.dqn.replay_capacity);
    let _ = writeln!(s, "agent.minibatch = {}", d.agent_opts.dqn.minibatch);
    let _ = writeln!(s, "agent.sgd_lr = {}", d.agent_opts.dqn.sgd_lr);
    let _ = writeln!(s, "agent.target_sync = {}", d.agent_opts.dqn.target_sync_period);
    let _ = writeln!(s, "# path to pretrained weights (dqn-hotboot); empty = unset");
    let _ = writeln!(s, "agent.hotboot_weights =");
    let _ = writeln!(s, "# pin the fixed baseline's action index; -1 = best in hindsight");
    let _ = writeln!(s, "agent.fixed_action = -1");
    let _ = writeln!(s);
    match scenario {
        Scenario::Offload => print_offload_section(&mut s, &d),
        Scenario::Auth => print_auth_section(&mut s, &d),
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "# Orderings must hold in this fraction of seeds for `compare`.");
    let _ = writeln!(s, "compare.min_seed_frac = {}", d.compare_min_seed_frac);
    s
}

fn print_offload_section(s: &mut String, d: &ExperimentConfig) {
    let o = &d.offload;
    let _ = writeln!(s, "# Offloading scenario.");
    let _ = writeln!(s, "offload.num_edges = {}", o.num_edges);
    let _ = writeln!(s, "offload.num_rate_levels = {}", o.num_rate_levels);
    let _ = writeln!(s, "offload.tx_power_mw = {}", o.tx_power_mw);
    let _ = writeln!(s, "offload.noise_mw = {}", o.noise_mw);
    let _ = writeln!(s, "offload.task_bits = {}", o.task_bits);
    let _ = writeln!(s, "offload.cpu_cycles_per_bit = {}", o.cpu_cycles_per_bit);
    let _ = writeln!(s, "offload.local_cpu_hz = {}", o.local_cpu_hz);
    let _ = writeln!(s, "offload.edge_cpu_hz = {}", o.edge_cpu_hz);
    let _ = writeln!(s, "offload.link_rate_bps_per_hz = {}", o.link_rate_bps_per_hz);
    let _ = writeln!(s, "offload.bandwidth_levels_mhz = {}", fmt_list(&o.bandwidth_levels_mhz));
    let _ = writeln!(s, "offload.energy_per_cycle_j = {}", o.energy_per_cycle_j);
    let _ = writeln!(s, "offload.battery_capacity_j = {}", o.battery_capacity_j);
    let _ = writeln!(s, "offload.user_density_levels = {}", fmt_list(&o.user_density_levels));
    let _ = writeln!(s, "offload.level_stay_prob = {}", o.level_stay_prob);
    let _ = writeln!(s, "offload.w_sinr = {}", o.weights.w_sinr);
    let _ = writeln!(s, "offload.w_ber = {}", o.weights.w_ber);
    let _ = writeln!(s, "offload.w_energy = {}", o.weights.w_energy);
    let _ = writeln!(s, "offload.w_delay = {}", o.weights.w_delay);
    let k = &d.channel_knobs;
    let _ = writeln!(s, "offload.device_gain_levels = {}", fmt_list(&k.device_gain_levels));
    let _ = writeln!(s, "offload.device_stay_prob = {}", k.device_stay_prob);
    let _ = writeln!(s, "offload.jam_gain_levels = {}", fmt_list(&k.jam_gain_levels));
    let _ = writeln!(s, "offload.jam_stay_prob = {}", k.jam_stay_prob);
    let _ = writeln!(s, "offload.obs_noise_sigma = {}", o.obs_noise_sigma);
    let _ = writeln!(s, "offload.obs_delay_slots = {}", o.obs_delay_slots);
    let _ = writeln!(s, "offload.txfail_timeout_factor = {}", o.txfail_timeout_factor);
    let _ = writeln!(s, "# frozen: exact observations, battery held full, enumerable MDP");
    let _ = writeln!(s, "offload.frozen = {}", o.frozen);
    let _ = writeln!(s, "offload.state_ceiling = {}", o.state_ceiling);
    let _ = writeln!(s, "# jammer kind: none | sweep | smart");
    let _ = writeln!(s, "offload.jammer.kind = {}", jammer_kind_name(o.jammer.kind));
    let _ = writeln!(s, "offload.jammer.jam_power_mw = {}", o.jammer.jam_power_mw);
    let _ = writeln!(s, "offload.jammer.sweep_period_slots = {}", o.jammer.sweep_period_slots);
    let _ = writeln!(s, "offload.jammer.distance_to_edge_m = {}", fmt_list(&o.jammer.distance_to_edge_m));
    let _ = writeln!(s, "offload.jammer.path_loss_exp = {}", o.jammer.path_loss_exp);
    let _ = writeln!(s, "offload.jammer.spillover = {}", o.jammer.spillover);
    let sm = &o.jammer.smart;
    let _ = writeln!(s, "offload.jammer.smart.alpha = {}", sm.hyper.alpha);
    let _ = writeln!(s, "offload.jammer.smart.gamma = {}", sm.hyper.gamma);
    let _ = writeln!(s, "offload.jammer.smart.epsilon0 = {}", sm.hyper.epsilon0);
    let _ = writeln!(s, "offload.jammer.smart.epsilon_min = {}", sm.hyper.epsilon_min);
    let _ = writeln!(s, "offload.jammer.smart.epsilon_decay = {}", sm.hyper.epsilon_decay);
    let _ = writeln!(s, "offload.jammer.smart.idle_cost = {}", sm.idle_cost);
    let _ = writeln!(s, "offload.jammer.smart.jam_cost = {}", sm.jam_cost);
    let _ = writeln!(s);
    let p = &d.pretrain;
    let _ = writeln!(s, "# Hotboot pretraining (perturbed-scenario curriculum).");
    let _ = writeln!(s, "pretrain.scenarios = {}", p.scenarios);
    let _ = writeln!(s, "pretrain.slots_per_scenario = {}", p.slots_per_scenario);
    let _ = writeln!(s, "pretrain.workers = {}", p.workers);
    let _ = writeln!(s, "pretrain.jam_power_jitter = {}", p.jam_power_jitter);
    let _ = writeln!(s, "pretrain.stay_prob_jitter = {}", p.stay_prob_jitter);
    let _ = writeln!(s, "pretrain.seed = {}", p.seed);
}

fn print_auth_section(s: &mut String, d: &ExperimentConfig) {
    let a = &d.auth;
    let _ = writeln!(s, "# Authentication scenario.");
    let _ = writeln!(s, "auth.vec_len = {}", a.vec_len);
    let _ = writeln!(s, "auth.legit_noise_sigma = {}", a.legit_noise_sigma);
    let _ = writeln!(s, "auth.spoof_offset = {}", a.spoof_offset);
    let _ = writeln!(s, "# slot:probability steps, e.g. 0:0.1,10000:0.5");
    let _ = writeln!(s, "auth.spoof_schedule = {}", fmt_schedule(&a.spoof_prob_schedule));
    let _ = writeln!(s, "auth.threshold_grid = {}", fmt_list(&a.threshold_grid));
    let _ = writeln!(s, "auth.window = {}", a.window);
    let _ = writeln!(s, "auth.gain_correct = {}", a.gain_correct);
    let _ = writeln!(s, "auth.cost_false_alarm = {}", a.cost_false_alarm);
    let _ = writeln!(s, "auth.cost_miss = {}", a.cost_miss);
}

fn jammer_kind_name(kind: JammerKind) -> &'static str {
    match kind {
        JammerKind::None => "none",
        JammerKind::Sweep => "sweep",
        JammerKind::Smart => "smart",
    }
}

/// Key-value store with line numbers; keys are consumed as they are read
/// so leftovers can be reported as unknown.
struct KeyMap {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyMap {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            };
            let trimmed = stripped.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                reason: format!("expected `key = value`, got `{trimmed}`"),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Parse { line, reason: "empty key".into() });
            }
            if entries.insert(key.clone(), (value.trim().to_string(), line)).is_some() {
                return Err(ConfigError::Parse {
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(KeyMap { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn first_unknown(&self) -> Option<ConfigError> {
        self.entries
            .iter()
            .next()
            .map(|(key, (_, line))| ConfigError::UnknownKey { key: key.clone(), line: *line })
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        reason: format!("cannot parse `{value}` for key `{key}`"),
    })
}

fn parse_list_f64(key: &str, value: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_scalar::<f64>(key, t, line))
        .collect()
}

fn parse_schedule(key: &str, value: &str, line: usize) -> Result<Vec<(u64, f64)>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|pair| {
            let (slot, prob) = pair.split_once(':').ok_or_else(|| ConfigError::Parse {
                line,
                reason: format!("`{pair}` in `{key}` is not `slot:probability`"),
            })?;
            Ok((
                parse_scalar::<u64>(key, slot.trim(), line)?,
                parse_scalar::<f64>(key, prob.trim(), line)?,
            ))
        })
        .collect()
}

macro_rules! take_into {
    ($map:expr, $key:expr, $slot:expr, $ty:ty) => {
        if let Some((value, line)) = $map.take($key) {
            $slot = parse_scalar::<$ty>($key, &value, line)?;
        }
    };
}

/// Parse configuration text over the defaults; `validate` still has to be
/// called by whoever decides the experiment is about to run.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut map = KeyMap::parse(text)?;
    let mut cfg = ExperimentConfig::default();

    if let Some((value, line)) = map.take("scenario") {
        cfg.scenario = match value.as_str() {
            "offload" => Scenario::Offload,
            "auth" => Scenario::Auth,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    reason: format!("unknown scenario `{other}` (offload | auth)"),
                })
            }
        };
    }
    if let Some((value, line)) = map.take("agent") {
        cfg.agent = match value.as_str() {
            "random" => AgentKind::Random,
            "fixed" => AgentKind::Fixed,
            "qlearn" => AgentKind::QLearn,
            "dynaq" => AgentKind::DynaQ,
            "pds" => AgentKind::Pds,
            "dqn" => AgentKind::Dqn,
            "dqn-hotboot" => AgentKind::DqnHotboot,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    reason: format!("unknown agent `{other}`"),
                })
            }
        };
    }
    take_into!(map, "slots", cfg.slots, u64);
    take_into!(map, "runs", cfg.runs, u64);
    take_into!(map, "base_seed", cfg.base_seed, u64);
    if let Some((value, _)) = map.take("out") {
        cfg.out_dir = PathBuf::from(value);
    }

    take_into!(map, "agent.alpha", cfg.agent_opts.hyper.alpha, f64);
    take_into!(map, "agent.gamma", cfg.agent_opts.hyper.gamma, f64);
    take_into!(map, "agent.epsilon0", cfg.agent_opts.hyper.epsilon0, f64);
    take_into!(map, "agent.epsilon_min", cfg.agent_opts.hyper.epsilon_min, f64);
    take_into!(map, "agent.epsilon_decay", cfg.agent_opts.hyper.epsilon_decay, f64);
    if let Some((value, line)) = map.take("agent.alpha_mode") {
        cfg.agent_opts.alpha_mode = match value.as_str() {
            "fixed" => AlphaMode::Fixed,
            "visit-decay" => AlphaMode::VisitDecay,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    reason: format!("unknown alpha_mode `{other}` (fixed | visit-decay)"),
                })
            }
        };
    }
    take_into!(map, "agent.planning_steps", cfg.agent_opts.planning_steps, usize);
    take_into!(map, "agent.obs_bins", cfg.agent_opts.obs_bins, usize);
    take_into!(map, "agent.window", cfg.agent_opts.dqn.window, usize);
    take_into!(map, "agent.conv1_filters", cfg.agent_opts.dqn.conv1_filters, usize);
    take_into!(map, "agent.conv1_kernel", cfg.agent_opts.dqn.conv1_kernel, usize);
    take_into!(map, "agent.conv2_filters", cfg.agent_opts.dqn.conv2_filters, usize);
    take_into!(map, "agent.conv2_kernel", cfg.agent_opts.dqn.conv2_kernel, usize);
    take_into!(map, "agent.hidden", cfg.agent_opts.dqn.hidden, usize);
    take_into!(map, "agent.replay_capacity", cfg.agent_opts.dqn.replay_capacity, usize);
    take_into!(map, "agent.minibatch", cfg.agent_opts.dqn.minibatch, usize);
    take_into!(map, "agent.sgd_lr", cfg.agent_opts.dqn.sgd_lr, f64);
    take_into!(map, "agent.target_sync", cfg.agent_opts.dqn.target_sync_period, usize);
    if let Some((value, _)) = map.take("agent.hotboot_weights") {
        cfg.agent_opts.hotboot_weights =
            if value.is_empty() { None } else { Some(PathBuf::from(value)) };
    }
    if let Some((value, line)) = map.take("agent.fixed_action") {
        let idx: i64 = parse_scalar("agent.fixed_action", &value, line)?;
        cfg.agent_opts.fixed_action = if idx < 0 { None } else { Some(idx as usize) };
    }

    take_into!(map, "offload.num_edges", cfg.offload.num_edges, usize);
    take_into!(map, "offload.num_rate_levels", cfg.offload.num_rate_levels, usize);
    take_into!(map, "offload.tx_power_mw", cfg.offload.tx_power_mw, f64);
    take_into!(map, "offload.noise_mw", cfg.offload.noise_mw, f64);
    take_into!(map, "offload.task_bits", cfg.offload.task_bits, u64);
    take_into!(map, "offload.cpu_cycles_per_bit", cfg.offload.cpu_cycles_per_bit, u64);
    take_into!(map, "offload.local_cpu_hz", cfg.offload.local_cpu_hz, f64);
    take_into!(map, "offload.edge_cpu_hz", cfg.offload.edge_cpu_hz, f64);
    take_into!(map, "offload.link_rate_bps_per_hz", cfg.offload.link_rate_bps_per_hz, f64);
    if let Some((value, line)) = map.take("offload.bandwidth_levels_mhz") {
        cfg.offload.bandwidth_levels_mhz =
            parse_list_f64("offload.bandwidth_levels_mhz", &value, line)?;
    }
    take_into!(map, "offload.energy_per_cycle_j", cfg.offload.energy_per_cycle_j, f64);
    take_into!(map, "offload.battery_capacity_j", cfg.offload.battery_capacity_j, f64);
    if let Some((value, line)) = map.take("offload.user_density_levels") {
        cfg.offload.user_density_levels =
            parse_list_f64("offload.user_density_levels", &value, line)?;
    }
    take_into!(map, "offload.level_stay_prob", cfg.offload.level_stay_prob, f64);
    let mut weights = RewardWeights::default();
    take_into!(map, "offload.w_sinr", weights.w_sinr, f64);
    take_into!(map, "offload.w_ber", weights.w_ber, f64);
    take_into!(map, "offload.w_energy", weights.w_energy, f64);
    take_into!(map, "offload.w_delay", weights.w_delay, f64);
    cfg.offload.weights = weights;
    if let Some((value, line)) = map.take("offload.device_gain_levels") {
        cfg.channel_knobs.device_gain_levels =
            parse_list_f64("offload.device_gain_levels", &value, line)?;
    }
    take_into!(map, "offload.device_stay_prob", cfg.channel_knobs.device_stay_prob, f64);
    if let Some((value, line)) = map.take("offload.jam_gain_levels") {
        cfg.channel_knobs.jam_gain_levels =
            parse_list_f64("offload.jam_gain_levels", &value, line)?;
    }
    take_into!(map, "offload.jam_stay_prob", cfg.channel_knobs.jam_stay_prob, f64);
    take_into!(map, "offload.obs_noise_sigma", cfg.offload.obs_noise_sigma, f64);
    take_into!(map, "offload.obs_delay_slots", cfg.offload.obs_delay_slots, usize);
    take_into!(map, "offload.txfail_timeout_factor", cfg.offload.txfail_timeout_factor, f64);
    take_into!(map, "offload.frozen", cfg.offload.frozen, bool);
    take_into!(map, "offload.state_ceiling", cfg.offload.state_ceiling, usize);
    if let Some((value, line)) = map.take("offload.jammer.kind") {
        cfg.offload.jammer.kind = match value.as_str() {
            "none" => JammerKind::None,
            "sweep" => JammerKind::Sweep,
            "smart" => JammerKind::Smart,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    reason: format!("unknown jammer kind `{other}` (none | sweep | smart)"),
                })
            }
        };
    }
    take_into!(map, "offload.jammer.jam_power_mw", cfg.offload.jammer.jam_power_mw, f64);
    take_into!(
        map,
        "offload.jammer.sweep_period_slots",
        cfg.offload.jammer.sweep_period_slots,
        usize
    );
    if let Some((value, line)) = map.take("offload.jammer.distance_to_edge_m") {
        cfg.offload.jammer.distance_to_edge_m =
            parse_list_f64("offload.jammer.distance_to_edge_m", &value, line)?;
    }
    take_into!(map, "offload.jammer.path_loss_exp", cfg.offload.jammer.path_loss_exp, f64);
    take_into!(map, "offload.jammer.spillover", cfg.offload.jammer.spillover, f64);
    take_into!(map, "offload.jammer.smart.alpha", cfg.offload.jammer.smart.hyper.alpha, f64);
    take_into!(map, "offload.jammer.smart.gamma", cfg.offload.jammer.smart.hyper.gamma, f64);
    take_into!(map, "offload.jammer.smart.epsilon0", cfg.offload.jammer.smart.hyper.epsilon0, f64);
    take_into!(
        map,
        "offload.jammer.smart.epsilon_min",
        cfg.offload.jammer.smart.hyper.epsilon_min,
        f64
    );
    take_into!(
        map,
        "offload.jammer.smart.epsilon_decay",
        cfg.offload.jammer.smart.hyper.epsilon_decay,
        f64
    );
    take_into!(map, "offload.jammer.smart.idle_cost", cfg.offload.jammer.smart.idle_cost, f64);
    take_into!(map, "offload.jammer.smart.jam_cost", cfg.offload.jammer.smart.jam_cost, f64);

    take_into!(map, "auth.vec_len", cfg.auth.vec_len, usize);
    take_into!(map, "auth.legit_noise_sigma", cfg.auth.legit_noise_sigma, f64);
    take_into!(map, "auth.spoof_offset", cfg.auth.spoof_offset, f64);
    if let Some((value, line)) = map.take("auth.spoof_schedule") {
        cfg.auth.spoof_prob_schedule = parse_schedule("auth.spoof_schedule", &value, line)?;
    }
    if let Some((value, line)) = map.take("auth.threshold_grid") {
        cfg.auth.threshold_grid = parse_list_f64("auth.threshold_grid", &value, line)?;
    }
    take_into!(map, "auth.window", cfg.auth.window, usize);
    take_into!(map, "auth.gain_correct", cfg.auth.gain_correct, f64);
    take_into!(map, "auth.cost_false_alarm", cfg.auth.cost_false_alarm, f64);
    take_into!(map, "auth.cost_miss", cfg.auth.cost_miss, f64);

    take_into!(map, "pretrain.scenarios", cfg.pretrain.scenarios, usize);
    take_into!(map, "pretrain.slots_per_scenario", cfg.pretrain.slots_per_scenario, u64);
    take_into!(map, "pretrain.workers", cfg.pretrain.workers, usize);
    take_into!(map, "pretrain.jam_power_jitter", cfg.pretrain.jam_power_jitter, f64);
    take_into!(map, "pretrain.stay_prob_jitter", cfg.pretrain.stay_prob_jitter, f64);
    take_into!(map, "pretrain.seed", cfg.pretrain.seed, u64);

    take_into!(map, "compare.min_seed_frac", cfg.compare_min_seed_frac, f64);

    if let Some(err) = map.first_unknown() {
        return Err(err);
    }
    cfg.rebuild_channels()?;
    Ok(cfg)
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("cannot read `{}`: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_text_roundtrips() {
        for scenario in [Scenario::Offload, Scenario::Auth] {
            let text = print_default_config(scenario);
            let parsed = parse_config(&text).unwrap();
            assert_eq!(parsed, ExperimentConfig::default_for(scenario));
            parsed.validate().unwrap();
        }
    }

    #[test]
    fn unknown_key_cites_the_key_and_line() {
        let err = parse_config("scenario = offload\nnum_eges = 0\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey { key: "num_eges".into(), line: 2 }
        );
    }

    #[test]
    fn invalid_field_names_the_field() {
        let cfg = parse_config("offload.num_edges = 0\nofflod_typo_absent = 1").unwrap_err();
        assert!(matches!(cfg, ConfigError::UnknownKey { .. }));
        let cfg = parse_config("offload.num_edges = 0").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("num_edges"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("slots = 10\nthis line has no equals\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config("slots = not_a_number").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config("slots = 1\nslots = 2").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# full line comment\n\nslots = 7 # trailing\n").unwrap();
        assert_eq!(cfg.slots, 7);
    }

    #[test]
    fn lists_and_schedules_parse() {
        let cfg = parse_config(
            "offload.bandwidth_levels_mhz = 1, 2, 5\nauth.spoof_schedule = 0:0.2,100:0.9\n",
        )
        .unwrap();
        assert_eq!(cfg.offload.bandwidth_levels_mhz, vec![1.0, 2.0, 5.0]);
        assert_eq!(cfg.auth.spoof_prob_schedule, vec![(0, 0.2), (100, 0.9)]);
    }

    #[test]
    fn pds_requires_frozen_offload() {
        let cfg = parse_config("agent = pds").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("frozen"));
        let cfg = parse_config("agent = pds\noffload.frozen = true\nofffload_absent=1");
        assert!(cfg.is_err());
        let mut ok = parse_config("agent = pds\noffload.frozen = true").unwrap();
        ok.offload.user_density_levels = vec![1.0];
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn hotboot_requires_existing_weights() {
        let cfg = parse_config("agent = dqn-hotboot").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("hotboot_weights"));
        let cfg =
            parse_config("agent = dqn-hotboot\nagent.hotboot_weights = /no/such/file").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("does not exist"));
    }
}
