//! Grade a learning agent against the exact solution of a frozen scenario:
//! enumerate the MDP, solve it by value iteration, train on ground states,
//! and report policy agreement and value regret.

use std::fmt::Write as _;

use crate::config::{AgentKind, ExperimentConfig, Scenario};
use crate::metrics::{fmt_float, median_f64};
use crate::HarnessError;
use mecrl_core::agents::{DynaModel, PdsModel, QLearningAgent};
use mecrl_core::offload::{enumerate_mdp, FrozenGround, OffloadAction, OffloadEnv};
use mecrl_core::oracle::{policy_match, policy_value, reachable_states, value_iteration};
use mecrl_core::params::EpsilonSchedule;
use mecrl_core::rng::{SeededRng, Stream};

#[derive(Clone, Debug)]
pub struct OracleRunResult {
    pub run: u64,
    pub seed: u64,
    /// Greedy-policy agreement with value iteration on reachable states.
    pub match_fraction: f64,
    /// max over reachable states of V*(s) - V_policy(s).
    pub sup_regret: f64,
    /// sup_regret relative to the sup norm of V*.
    pub regret_frac: f64,
}

#[derive(Clone, Debug)]
pub struct OracleCheckReport {
    pub agent: AgentKind,
    pub states: usize,
    pub actions: usize,
    pub reachable: usize,
    pub training_steps: u64,
    pub oracle_iterations: usize,
    pub per_run: Vec<OracleRunResult>,
    pub median_match: f64,
    pub median_regret_frac: f64,
}

const ORACLE_TOL: f64 = 1e-9;

/// Train `cfg.agent` on the frozen scenario's ground states for
/// `cfg.slots` steps per run and compare against the solver.
pub fn oracle_check(cfg: &ExperimentConfig) -> Result<OracleCheckReport, HarnessError> {
    cfg.validate()?;
    if cfg.scenario != Scenario::Offload {
        return Err(HarnessError::Usage(
            "oracle-check needs the offload scenario (the auth game has no frozen mode)".into(),
        ));
    }
    match cfg.agent {
        AgentKind::QLearn | AgentKind::DynaQ | AgentKind::Pds | AgentKind::Random => {}
        other => {
            return Err(HarnessError::Usage(format!(
                "oracle-check grades ground-state policies; `{}` has none \
                 (use qlearn, dynaq, pds, or random)",
                other.name()
            )))
        }
    }
    let gamma = cfg.agent_opts.hyper.gamma;
    let mdp = enumerate_mdp(&cfg.offload, gamma)?;
    let solution = value_iteration(&mdp, ORACLE_TOL)?;
    let ground = FrozenGround::new(&cfg.offload)?;
    let reachable = reachable_states(&mdp, &solution.policy, ground.canonical_start());
    let v_star_sup = solution.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut per_run = Vec::new();
    for run in 0..cfg.runs {
        let seed = cfg.base_seed.wrapping_add(run);
        let policy = train_policy(cfg, &ground, seed)?;
        let match_fraction = policy_match(&policy, &solution.policy, &reachable);
        let values = policy_value(&mdp, &policy, ORACLE_TOL)?;
        let sup_regret = reachable
            .iter()
            .map(|&s| solution.values[s] - values[s])
            .fold(0.0f64, f64::max);
        let regret_frac = if v_star_sup > 0.0 { sup_regret / v_star_sup } else { 0.0 };
        per_run.push(OracleRunResult { run, seed, match_fraction, sup_regret, regret_frac });
    }
    let median_match =
        median_f64(&per_run.iter().map(|r| r.match_fraction).collect::<Vec<_>>());
    let median_regret_frac =
        median_f64(&per_run.iter().map(|r| r.regret_frac).collect::<Vec<_>>());
    Ok(OracleCheckReport {
        agent: cfg.agent,
        states: mdp.states,
        actions: mdp.actions,
        reachable: reachable.len(),
        training_steps: cfg.slots,
        oracle_iterations: solution.iterations,
        per_run,
        median_match,
        median_regret_frac,
    })
}

fn train_policy(
    cfg: &ExperimentConfig,
    ground: &FrozenGround,
    seed: u64,
) -> Result<Vec<usize>, HarnessError> {
    let env_cfg = &cfg.offload;
    let states = ground.states();
    let actions = ground.num_actions();
    let hp = cfg.agent_opts.hyper;
    let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);

    if cfg.agent == AgentKind::Random {
        return Ok((0..states).map(|_| explore.next_below(actions)).collect());
    }

    let (mut env, _) = OffloadEnv::reset(env_cfg.clone(), seed)?;
    let mut sched = EpsilonSchedule::new(&hp);
    let mut state = env.ground_state_index(ground);
    match cfg.agent {
        AgentKind::QLearn | AgentKind::DynaQ => {
            let mut agent = QLearningAgent::new(states, actions, hp, cfg.agent_opts.alpha_mode);
            let planning =
                if cfg.agent == AgentKind::DynaQ { cfg.agent_opts.planning_steps } else { 0 };
            let mut model = DynaModel::new(actions);
            let mut plan_rng = SeededRng::for_stream(seed, Stream::Planning);
            for _ in 0..cfg.slots {
                let eps = sched.step();
                let a = agent.select(state, eps, &mut explore);
                let (_, rb) = env.step(OffloadAction::from_index(env_cfg, a))?;
                let next = env.ground_state_index(ground);
                agent.observe(state, a, rb.utility, next);
                if planning > 0 {
                    model.record(state, a, rb.utility, next);
                    model.plan(&mut agent.table, planning, &hp, cfg.agent_opts.alpha_mode, &mut plan_rng);
                }
                state = next;
            }
            Ok(agent.table.policy())
        }
        AgentKind::Pds => {
            let mut model = PdsModel::new(ground);
            for _ in 0..cfg.slots {
                let eps = sched.step();
                let a = mecrl_core::agents::epsilon_greedy(
                    &model.action_row(ground, state),
                    eps,
                    &mut explore,
                );
                let (_, rb) = env.step(OffloadAction::from_index(env_cfg, a))?;
                let next = env.ground_state_index(ground);
                let unknown = rb.utility - ground.known_reward(state, a);
                model.update(ground, state, a, unknown, next, &hp);
                state = next;
            }
            Ok((0..states).map(|s| model.greedy(ground, s)).collect())
        }
        _ => unreachable!("filtered above"),
    }
}

pub fn render_oracle_check(report: &OracleCheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "oracle check: {} agent on {} ground states x {} actions \
         ({} reachable), {} training steps per run",
        report.agent.name(),
        report.states,
        report.actions,
        report.reachable,
        report.training_steps
    );
    let _ = writeln!(s, "value iteration converged in {} sweeps", report.oracle_iterations);
    for r in &report.per_run {
        let _ = writeln!(
            s,
            "run {} (seed {}): policy match {:.4}, sup regret {:.6} ({:.2}% of |V*|)",
            r.run,
            r.seed,
            r.match_fraction,
            r.sup_regret,
            100.0 * r.regret_frac
        );
    }
    let _ = writeln!(s, "[machine]");
    let _ = writeln!(s, "agent = {}", report.agent.name());
    let _ = writeln!(s, "states = {}", report.states);
    let _ = writeln!(s, "reachable = {}", report.reachable);
    let _ = writeln!(s, "median_match = {}", fmt_float(report.median_match));
    let _ = writeln!(s, "median_regret_frac = {}", fmt_float(report.median_regret_frac));
    for r in &report.per_run {
        let _ = writeln!(s, "run{}.match = {}", r.run, fmt_float(r.match_fraction));
        let _ = writeln!(s, "run{}.regret_frac = {}", r.run, fmt_float(r.regret_frac));
    }
    s
}
