//! Seeded experiment execution: observe, act, step, learn, log — one row
//! per slot per run. Runs are shared-nothing and executed in run-index
//! order, so output bytes never depend on scheduling.

use std::path::PathBuf;

use crate::config::{AgentKind, ExperimentConfig, Scenario};
use crate::metrics::{summarize, to_csv, AuthRow, OffloadRow, Rows, SummaryReport};
use crate::HarnessError;
use mecrl_core::agents::{
    DqnAgent, DynaModel, InputWindow, PdsModel, QLearningAgent, QNetwork,
};
use mecrl_core::auth::{self, AuthEnv};
use mecrl_core::offload::{
    normalize_observation, observation_quantizers, FrozenGround, OffloadAction, OffloadEnv,
    SlotObservation, Transition,
};
use mecrl_core::params::EpsilonSchedule;
use mecrl_core::quant::{state_index, Quantizer};
use mecrl_core::rng::{SeededRng, Stream};

/// Everything a finished experiment produced.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub rows: Rows,
    pub summary: SummaryReport,
    pub csv_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
}

/// Run the experiment and write `<out>/<scenario>_<agent>.csv` plus the
/// summary file next to it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let mut result = simulate_experiment(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| HarnessError::Io(format!("cannot create `{}`: {e}", cfg.out_dir.display())))?;
    let stem = format!("{}_{}", cfg.scenario.name(), cfg.agent.name());
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    let summary_path = cfg.out_dir.join(format!("{stem}_summary.txt"));
    std::fs::write(&csv_path, to_csv(&result.rows))
        .map_err(|e| HarnessError::Io(format!("cannot write `{}`: {e}", csv_path.display())))?;
    std::fs::write(&summary_path, crate::metrics::render_summary(&result.summary))
        .map_err(|e| HarnessError::Io(format!("cannot write `{}`: {e}", summary_path.display())))?;
    result.csv_path = Some(csv_path);
    result.summary_path = Some(summary_path);
    Ok(result)
}

/// Pure simulation: no filesystem access, deterministic in the config.
pub fn simulate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let rows = match cfg.scenario {
        Scenario::Offload => Rows::Offload(simulate_offload(cfg)?),
        Scenario::Auth => Rows::Auth(simulate_auth(cfg)?),
    };
    let summary = summarize(cfg.scenario, cfg.agent, cfg.slots, cfg.runs, &rows);
    Ok(ExperimentResult { rows, summary, csv_path: None, summary_path: None })
}

fn run_seed(cfg: &ExperimentConfig, run: u64) -> u64 {
    cfg.base_seed.wrapping_add(run)
}

fn simulate_offload(cfg: &ExperimentConfig) -> Result<Vec<OffloadRow>, HarnessError> {
    let mut rows = Vec::new();
    for run in 0..cfg.runs {
        rows.extend(offload_run(cfg, run, run_seed(cfg, run))?);
    }
    Ok(rows)
}

fn simulate_auth(cfg: &ExperimentConfig) -> Result<Vec<AuthRow>, HarnessError> {
    let mut rows = Vec::new();
    for run in 0..cfg.runs {
        rows.extend(auth_run(cfg, run, run_seed(cfg, run))?);
    }
    Ok(rows)
}

/// Quantized tabular index of an offload observation.
fn encode_offload_obs(
    quant: &[Quantizer; 4],
    obs: &SlotObservation,
) -> usize {
    let bins = [
        quant[0].bin(obs.jam_power_mw),
        quant[1].bin(obs.bandwidth_mhz),
        quant[2].bin(obs.battery_frac),
        quant[3].bin(obs.user_density),
    ];
    let radices = [quant[0].bins(), quant[1].bins(), quant[2].bins(), quant[3].bins()];
    state_index(&radices, &bins).expect("quantizer bins are in range")
}

fn offload_row(
    run: u64,
    slot: u64,
    action: OffloadAction,
    rb: &mecrl_core::offload::RewardBreakdown,
    epsilon: f64,
) -> OffloadRow {
    OffloadRow {
        run,
        slot,
        edge: action.edge_index,
        rate_level: action.rate_level,
        sinr: rb.sinr,
        ber: rb.ber,
        energy_j: rb.energy_j,
        delay_s: rb.delay_s,
        utility: rb.utility,
        epsilon,
    }
}

fn offload_run(
    cfg: &ExperimentConfig,
    run: u64,
    seed: u64,
) -> Result<Vec<OffloadRow>, HarnessError> {
    let env_cfg = &cfg.offload;
    let actions = env_cfg.num_actions();
    let slots = cfg.slots;
    match cfg.agent {
        AgentKind::Random => {
            let (mut env, _) = OffloadEnv::reset(env_cfg.clone(), seed)?;
            let mut rng = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let action = OffloadAction::from_index(env_cfg, rng.next_below(actions));
                let (_, rb) = env.step(action)?;
                rows.push(offload_row(run, slot, action, &rb, 1.0));
            }
            Ok(rows)
        }
        AgentKind::Fixed => {
            let candidates: Vec<usize> = match cfg.agent_opts.fixed_action {
                Some(a) => vec![a],
                None => (0..actions).collect(),
            };
            let mut best: Option<(f64, Vec<OffloadRow>)> = None;
            for idx in candidates {
                let action = OffloadAction::from_index(env_cfg, idx);
                let (mut env, _) = OffloadEnv::reset(env_cfg.clone(), seed)?;
                let mut rows = Vec::with_capacity(slots as usize);
                let mut total = 0.0;
                for slot in 0..slots {
                    let (_, rb) = env.step(action)?;
                    total += rb.utility;
                    rows.push(offload_row(run, slot, action, &rb, 0.0));
                }
                // Strictly-better replacement keeps the lowest index on ties.
                if best.as_ref().is_none_or(|(b, _)| total > *b) {
                    best = Some((total, rows));
                }
            }
            Ok(best.map(|(_, rows)| rows).unwrap_or_default())
        }
        AgentKind::QLearn | AgentKind::DynaQ => {
            let quant = observation_quantizers(env_cfg, cfg.agent_opts.obs_bins)?;
            let states: usize = quant.iter().map(|q| q.bins()).product();
            let (mut env, first_obs) = OffloadEnv::reset(env_cfg.clone(), seed)?;
            let mut agent = QLearningAgent::new(
                states,
                actions,
                cfg.agent_opts.hyper,
                cfg.agent_opts.alpha_mode,
            );
            let planning = if cfg.agent == AgentKind::DynaQ {
                cfg.agent_opts.planning_steps
            } else {
                0
            };
            let mut model = DynaModel::new(actions);
            let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut plan_rng = SeededRng::for_stream(seed, Stream::Planning);
            let mut sched = EpsilonSchedule::new(&cfg.agent_opts.hyper);
            let mut state = encode_offload_obs(&quant, &first_obs);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let eps = sched.step();
                let a = agent.select(state, eps, &mut explore);
                let action = OffloadAction::from_index(env_cfg, a);
                let (obs, rb) = env.step(action)?;
                let next = encode_offload_obs(&quant, &obs);
                agent.observe(state, a, rb.utility, next);
                if planning > 0 {
                    model.record(state, a, rb.utility, next);
                    model.plan(
                        &mut agent.table,
                        planning,
                        &cfg.agent_opts.hyper,
                        cfg.agent_opts.alpha_mode,
                        &mut plan_rng,
                    );
                }
                rows.push(offload_row(run, slot, action, &rb, eps));
                state = next;
            }
            Ok(rows)
        }
        AgentKind::Pds => {
            let ground = FrozenGround::new(env_cfg)?;
            let (mut env, _) = OffloadEnv::reset(env_cfg.clone(), seed)?;
            let mut model = PdsModel::new(&ground);
            let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut sched = EpsilonSchedule::new(&cfg.agent_opts.hyper);
            let mut state = env.ground_state_index(&ground);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let eps = sched.step();
                let a = mecrl_core::agents::epsilon_greedy(
                    &model.action_row(&ground, state),
                    eps,
                    &mut explore,
                );
                let action = OffloadAction::from_index(env_cfg, a);
                let (_, rb) = env.step(action)?;
                let next = env.ground_state_index(&ground);
                let unknown = rb.utility - ground.known_reward(state, a);
                model.update(&ground, state, a, unknown, next, &cfg.agent_opts.hyper);
                rows.push(offload_row(run, slot, action, &rb, eps));
                state = next;
            }
            Ok(rows)
        }
        AgentKind::Dqn | AgentKind::DqnHotboot => {
            let (mut env, first_obs) = OffloadEnv::reset(env_cfg.clone(), seed)?;
            let mut init = SeededRng::for_stream(seed, Stream::AgentInit);
            let mut agent = DqnAgent::new(
                4,
                actions,
                cfg.agent_opts.dqn,
                cfg.agent_opts.hyper.gamma,
                &mut init,
                SeededRng::for_stream(seed, Stream::Replay),
            )?;
            if cfg.agent == AgentKind::DqnHotboot {
                let path = cfg.agent_opts.hotboot_weights.as_ref().expect("validated");
                let file = std::fs::File::open(path)
                    .map_err(|e| HarnessError::Io(format!("cannot open `{}`: {e}", path.display())))?;
                let net =
                    QNetwork::load(*agent.network().spec(), &mut std::io::BufReader::new(file))?;
                agent.load_network(net)?;
            }
            let mut window =
                InputWindow::new(cfg.agent_opts.dqn.window, 4, actions);
            window.push(&normalize_observation(env_cfg, &first_obs), None);
            let mut input = window.as_input();
            let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut sched = EpsilonSchedule::new(&cfg.agent_opts.hyper);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let eps = sched.step();
                let a = agent.select(&input, eps, &mut explore);
                let action = OffloadAction::from_index(env_cfg, a);
                let (obs, rb) = env.step(action)?;
                window.push(&normalize_observation(env_cfg, &obs), Some(a));
                let next_input = window.as_input();
                agent.observe(Transition {
                    state: input,
                    action: a,
                    reward: rb.utility,
                    next_state: next_input.clone(),
                });
                rows.push(offload_row(run, slot, action, &rb, eps));
                input = next_input;
            }
            Ok(rows)
        }
    }
}

fn auth_row(
    run: u64,
    slot: u64,
    theta_index: usize,
    theta: f64,
    outcome: &mecrl_core::auth::AuthOutcome,
    obs: &mecrl_core::auth::AuthObservation,
    reward: f64,
    epsilon: f64,
) -> AuthRow {
    AuthRow {
        run,
        slot,
        theta_index,
        theta,
        truth: outcome.truth,
        decision: outcome.decision,
        reward,
        recent_far: obs.recent_false_alarm_rate,
        recent_mdr: obs.recent_miss_rate,
        epsilon,
    }
}

fn encode_auth_obs(quant: &[Quantizer; 3], obs: &mecrl_core::auth::AuthObservation) -> usize {
    let bins = [
        quant[0].bin(obs.recent_false_alarm_rate),
        quant[1].bin(obs.recent_miss_rate),
        quant[2].bin(obs.recent_spoof_freq),
    ];
    let radices = [quant[0].bins(), quant[1].bins(), quant[2].bins()];
    state_index(&radices, &bins).expect("quantizer bins are in range")
}

fn auth_run(cfg: &ExperimentConfig, run: u64, seed: u64) -> Result<Vec<AuthRow>, HarnessError> {
    let env_cfg = &cfg.auth;
    let grid = env_cfg.threshold_grid.clone();
    let actions = grid.len();
    let slots = cfg.slots;
    match cfg.agent {
        AgentKind::Random => {
            let (mut env, _) = AuthEnv::reset(env_cfg.clone(), seed)?;
            let mut rng = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let idx = rng.next_below(actions);
                let (obs, reward, outcome) = env.step(idx)?;
                rows.push(auth_row(run, slot, idx, grid[idx], &outcome, &obs, reward, 1.0));
            }
            Ok(rows)
        }
        AgentKind::Fixed => {
            let candidates: Vec<usize> = match cfg.agent_opts.fixed_action {
                Some(a) => vec![a],
                None => (0..actions).collect(),
            };
            let mut best: Option<(f64, Vec<AuthRow>)> = None;
            for idx in candidates {
                let (mut env, _) = AuthEnv::reset(env_cfg.clone(), seed)?;
                let mut rows = Vec::with_capacity(slots as usize);
                let mut total = 0.0;
                for slot in 0..slots {
                    let (obs, reward, outcome) = env.step(idx)?;
                    total += reward;
                    rows.push(auth_row(run, slot, idx, grid[idx], &outcome, &obs, reward, 0.0));
                }
                if best.as_ref().is_none_or(|(b, _)| total > *b) {
                    best = Some((total, rows));
                }
            }
            Ok(best.map(|(_, rows)| rows).unwrap_or_default())
        }
        AgentKind::QLearn | AgentKind::DynaQ => {
            let quant = auth::observation_quantizers(cfg.agent_opts.obs_bins)?;
            let states: usize = quant.iter().map(|q| q.bins()).product();
            let (mut env, first_obs) = AuthEnv::reset(env_cfg.clone(), seed)?;
            let mut agent = QLearningAgent::new(
                states,
                actions,
                cfg.agent_opts.hyper,
                cfg.agent_opts.alpha_mode,
            );
            let planning = if cfg.agent == AgentKind::DynaQ {
                cfg.agent_opts.planning_steps
            } else {
                0
            };
            let mut model = DynaModel::new(actions);
            let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut plan_rng = SeededRng::for_stream(seed, Stream::Planning);
            let mut sched = EpsilonSchedule::new(&cfg.agent_opts.hyper);
            let mut state = encode_auth_obs(&quant, &first_obs);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let eps = sched.step();
                let idx = agent.select(state, eps, &mut explore);
                let (obs, reward, outcome) = env.step(idx)?;
                let next = encode_auth_obs(&quant, &obs);
                agent.observe(state, idx, reward, next);
                if planning > 0 {
                    model.record(state, idx, reward, next);
                    model.plan(
                        &mut agent.table,
                        planning,
                        &cfg.agent_opts.hyper,
                        cfg.agent_opts.alpha_mode,
                        &mut plan_rng,
                    );
                }
                rows.push(auth_row(run, slot, idx, grid[idx], &outcome, &obs, reward, eps));
                state = next;
            }
            Ok(rows)
        }
        AgentKind::Pds => unreachable!("rejected by validate()"),
        AgentKind::Dqn | AgentKind::DqnHotboot => {
            let (mut env, first_obs) = AuthEnv::reset(env_cfg.clone(), seed)?;
            let mut init = SeededRng::for_stream(seed, Stream::AgentInit);
            let mut agent = DqnAgent::new(
                3,
                actions,
                cfg.agent_opts.dqn,
                cfg.agent_opts.hyper.gamma,
                &mut init,
                SeededRng::for_stream(seed, Stream::Replay),
            )?;
            if cfg.agent == AgentKind::DqnHotboot {
                let path = cfg.agent_opts.hotboot_weights.as_ref().expect("validated");
                let file = std::fs::File::open(path)
                    .map_err(|e| HarnessError::Io(format!("cannot open `{}`: {e}", path.display())))?;
                let net =
                    QNetwork::load(*agent.network().spec(), &mut std::io::BufReader::new(file))?;
                agent.load_network(net)?;
            }
            let mut window = InputWindow::new(cfg.agent_opts.dqn.window, 3, actions);
            window.push(&auth::normalize_observation(&first_obs), None);
            let mut input = window.as_input();
            let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
            let mut sched = EpsilonSchedule::new(&cfg.agent_opts.hyper);
            let mut rows = Vec::with_capacity(slots as usize);
            for slot in 0..slots {
                let eps = sched.step();
                let idx = agent.select(&input, eps, &mut explore);
                let (obs, reward, outcome) = env.step(idx)?;
                window.push(&auth::normalize_observation(&obs), Some(idx));
                let next_input = window.as_input();
                agent.observe(Transition {
                    state: input,
                    action: idx,
                    reward,
                    next_state: next_input.clone(),
                });
                rows.push(auth_row(run, slot, idx, grid[idx], &outcome, &obs, reward, eps));
                input = next_input;
            }
            Ok(rows)
        }
    }
}
