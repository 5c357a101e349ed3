//! Hotboot pretraining: train the DQN across randomized perturbations of
//! the target offloading scenario and serialize the resulting weights for
//! later warm starts.

use std::path::Path;

use crate::config::{ExperimentConfig, Scenario};
use crate::HarnessError;
use mecrl_core::agents::{average_params, DqnAgent, InputWindow, QNetwork};
use mecrl_core::offload::{normalize_observation, OffloadAction, OffloadConfig, OffloadEnv, Transition};
use mecrl_core::params::EpsilonSchedule;
use mecrl_core::rng::{SeededRng, Stream};

#[derive(Clone, Debug)]
pub struct PretrainReport {
    pub scenarios: usize,
    pub workers: usize,
    pub slots_per_scenario: u64,
    pub weights_path: std::path::PathBuf,
}

/// One perturbed variant of the target scenario.
fn perturbed_scenario(
    cfg: &ExperimentConfig,
    rng: &mut SeededRng,
) -> Result<OffloadConfig, HarnessError> {
    let p = &cfg.pretrain;
    let mut variant = cfg.clone();
    let jam_jitter = rng.uniform(-p.jam_power_jitter, p.jam_power_jitter);
    let stay_jitter = rng.uniform(-p.stay_prob_jitter, p.stay_prob_jitter);
    variant.offload.jammer.jam_power_mw *= 1.0 + jam_jitter;
    variant.channel_knobs.device_stay_prob =
        (variant.channel_knobs.device_stay_prob * (1.0 + stay_jitter)).clamp(0.05, 0.95);
    variant.rebuild_channels()?;
    Ok(variant.offload)
}

fn train_on_scenario(
    agent: &mut DqnAgent,
    env_cfg: &OffloadConfig,
    slots: u64,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<(), HarnessError> {
    let (mut env, first_obs) = OffloadEnv::reset(env_cfg.clone(), seed)?;
    let mut window =
        InputWindow::new(cfg.agent_opts.dqn.window, 4, env_cfg.num_actions());
    window.push(&normalize_observation(env_cfg, &first_obs), None);
    let mut input = window.as_input();
    let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
    let mut sched = EpsilonSchedule::new(&cfg.agent_opts.hyper);
    for _ in 0..slots {
        let eps = sched.step();
        let a = agent.select(&input, eps, &mut explore);
        let (obs, rb) = env.step(OffloadAction::from_index(env_cfg, a))?;
        window.push(&normalize_observation(env_cfg, &obs), Some(a));
        let next_input = window.as_input();
        agent.observe(Transition {
            state: input,
            action: a,
            reward: rb.utility,
            next_state: next_input.clone(),
        });
        input = next_input;
    }
    Ok(())
}

/// Run the pretraining curriculum and write the weights file.
///
/// Scenario variants are assigned to workers round-robin; every worker
/// starts from the same initial network and the worker results are
/// averaged in worker-index order, so the worker count is a documented
/// part of the configuration, not a scheduling artifact.
pub fn pretrain(cfg: &ExperimentConfig, out_path: &Path) -> Result<PretrainReport, HarnessError> {
    if cfg.scenario != Scenario::Auth && cfg.scenario != Scenario::Offload {
        unreachable!()
    }
    if cfg.scenario != Scenario::Offload {
        return Err(HarnessError::Usage(
            "pretraining targets the offload scenario's DQN".into(),
        ));
    }
    cfg.offload.validate().map_err(HarnessError::Offload)?;
    let p = &cfg.pretrain;
    if p.scenarios == 0 || p.workers == 0 {
        return Err(HarnessError::Usage(
            "pretrain.scenarios and pretrain.workers must be positive".into(),
        ));
    }
    let actions = cfg.offload.num_actions();
    let mut perturb_rng = SeededRng::for_stream(p.seed, Stream::Pretrain);
    let scenarios: Vec<OffloadConfig> = (0..p.scenarios)
        .map(|_| perturbed_scenario(cfg, &mut perturb_rng))
        .collect::<Result<_, _>>()?;

    let mut init_rng = SeededRng::for_stream(p.seed, Stream::AgentInit);
    let initial = QNetwork::new(cfg.agent_opts.dqn.net_spec(4, actions), &mut init_rng)?;

    let workers = p.workers.min(p.scenarios);
    let mut worker_params: Vec<Vec<f64>> = Vec::with_capacity(workers);
    for worker in 0..workers {
        let mut agent = DqnAgent::new(
            4,
            actions,
            cfg.agent_opts.dqn,
            cfg.agent_opts.hyper.gamma,
            &mut SeededRng::for_stream(p.seed ^ worker as u64, Stream::AgentInit),
            SeededRng::for_stream(p.seed.wrapping_add(worker as u64), Stream::Replay),
        )?;
        agent.load_network(initial.clone())?;
        for (i, scenario) in scenarios.iter().enumerate() {
            if i % workers != worker {
                continue;
            }
            let seed = p.seed.wrapping_add(1 + i as u64);
            train_on_scenario(&mut agent, scenario, p.slots_per_scenario, seed, cfg)?;
        }
        worker_params.push(agent.network().params().to_vec());
    }

    let mut net = initial;
    net.params_mut().copy_from_slice(&average_params(&worker_params));
    let mut file = std::fs::File::create(out_path)
        .map_err(|e| HarnessError::Io(format!("cannot create `{}`: {e}", out_path.display())))?;
    net.save(&mut file)?;
    Ok(PretrainReport {
        scenarios: p.scenarios,
        workers,
        slots_per_scenario: p.slots_per_scenario,
        weights_path: out_path.to_path_buf(),
    })
}
