//! Learning agents graded against the value-iteration solver on frozen
//! scenarios: plain Q-learning converges to the optimal policy, Dyna-Q
//! planning gets there in fewer real steps, and post-decision-state
//! learning is never slower.

use mecrl_core::agents::{AlphaMode, DynaModel, PdsModel, QLearningAgent};
use mecrl_core::offload::{enumerate_mdp, FrozenGround, OffloadAction, OffloadConfig, OffloadEnv};
use mecrl_core::oracle::{policy_match, reachable_states, value_iteration, Solution};
use mecrl_core::params::{AgentHyperparams, EpsilonSchedule};
use mecrl_core::rng::{SeededRng, Stream};

struct Oracle {
    solution: Solution,
    reachable: Vec<usize>,
}

fn solve(cfg: &OffloadConfig, gamma: f64) -> Oracle {
    let mdp = enumerate_mdp(cfg, gamma).expect("frozen scenario enumerates");
    let solution = value_iteration(&mdp, 1e-9).expect("value iteration converges");
    let ground = FrozenGround::new(cfg).unwrap();
    let reachable = reachable_states(&mdp, &solution.policy, ground.canonical_start());
    Oracle { solution, reachable }
}

enum Learner {
    Tabular { plan_steps: usize },
    PostDecision,
}

/// Train on ground states; return the first step count at which the greedy
/// policy matches the oracle on `target` of reachable states, and the
/// final match fraction.
fn train(
    cfg: &OffloadConfig,
    learner: Learner,
    hp: AgentHyperparams,
    seed: u64,
    max_steps: usize,
    eval_every: usize,
    oracle: &Oracle,
    target: f64,
) -> (Option<usize>, f64) {
    let ground = FrozenGround::new(cfg).unwrap();
    let states = ground.states();
    let actions = ground.num_actions();
    let (mut env, _) = OffloadEnv::reset(cfg.clone(), seed).unwrap();
    let mut explore_rng = SeededRng::for_stream(seed, Stream::AgentExplore);
    let mut plan_rng = SeededRng::for_stream(seed, Stream::Planning);
    let mut schedule = EpsilonSchedule::new(&hp);

    let mut tabular = QLearningAgent::new(states, actions, hp, AlphaMode::VisitDecay);
    let mut model = DynaModel::new(actions);
    let mut pds = PdsModel::new(&ground);

    let mut hit_at = None;
    let mut last_match = 0.0;
    let mut state = env.ground_state_index(&ground);
    for step in 0..max_steps {
        let eps = schedule.step();
        let action = match &learner {
            Learner::Tabular { .. } => tabular.select(state, eps, &mut explore_rng),
            Learner::PostDecision => {
                mecrl_core::agents::epsilon_greedy(
                    &pds.action_row(&ground, state),
                    eps,
                    &mut explore_rng,
                )
            }
        };
        let (_, rb) = env.step(OffloadAction::from_index(cfg, action)).unwrap();
        let next = env.ground_state_index(&ground);
        match &learner {
            Learner::Tabular { plan_steps } => {
                tabular.observe(state, action, rb.utility, next);
                if *plan_steps > 0 {
                    model.record(state, action, rb.utility, next);
                    model.plan(&mut tabular.table, *plan_steps, &hp, AlphaMode::VisitDecay, &mut plan_rng);
                }
            }
            Learner::PostDecision => {
                let unknown = rb.utility - ground.known_reward(state, action);
                pds.update(&ground, state, action, unknown, next, &hp);
            }
        }
        state = next;

        if (step + 1) % eval_every == 0 || step + 1 == max_steps {
            let policy: Vec<usize> = match &learner {
                Learner::Tabular { .. } => tabular.table.policy(),
                Learner::PostDecision => {
                    (0..states).map(|s| pds.greedy(&ground, s)).collect()
                }
            };
            last_match = policy_match(&policy, &oracle.solution.policy, &oracle.reachable);
            if last_match >= target && hit_at.is_none() {
                hit_at = Some(step + 1);
            }
        }
    }
    (hit_at, last_match)
}

fn exploration_hp(gamma: f64, decay: f64) -> AgentHyperparams {
    AgentHyperparams {
        alpha: 0.7,
        gamma,
        epsilon0: 1.0,
        epsilon_min: 0.05,
        epsilon_decay: decay,
    }
}

fn median(mut xs: Vec<usize>) -> usize {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

#[test]
fn tiny_scenario_qlearning_matches_oracle() {
    let cfg = OffloadConfig::frozen_tiny();
    let gamma = 0.1;
    let oracle = solve(&cfg, gamma);
    let hp = exploration_hp(gamma, 0.9995);
    let (_, final_match) = train(
        &cfg,
        Learner::Tabular { plan_steps: 0 },
        hp,
        424,
        30_000,
        1000,
        &oracle,
        0.95,
    );
    assert!(final_match >= 0.95, "final match {final_match}");
}

#[test]
fn planning_reaches_oracle_match_in_fewer_real_steps() {
    let cfg = OffloadConfig::frozen_scenario();
    // A higher discount makes stale bootstraps costly, which is exactly
    // what hypothetical replay repairs.
    let gamma = 0.3;
    let oracle = solve(&cfg, gamma);
    let hp = exploration_hp(gamma, 0.99998);
    let max_steps = 150_000;
    let target = 0.85;
    let mut plain = Vec::new();
    let mut planned = Vec::new();
    for seed in 0..10 {
        let (hit_q, match_q) = train(
            &cfg,
            Learner::Tabular { plan_steps: 0 },
            hp,
            seed,
            max_steps,
            2000,
            &oracle,
            target,
        );
        let (hit_d, match_d) = train(
            &cfg,
            Learner::Tabular { plan_steps: 10 },
            hp,
            seed,
            max_steps,
            2000,
            &oracle,
            target,
        );
        plain.push(hit_q.unwrap_or(max_steps + 1));
        planned.push(hit_d.unwrap_or(max_steps + 1));
        eprintln!(
            "seed {seed}: qlearn {:?} (final {match_q:.3}), dynaq {:?} (final {match_d:.3})",
            hit_q, hit_d
        );
    }
    let med_q = median(plain);
    let med_d = median(planned);
    eprintln!("median steps to {target} match: qlearn {med_q}, dynaq {med_d}");
    assert!(med_d < med_q, "dynaq {med_d} not faster than qlearn {med_q}");
}

#[test]
fn post_decision_learning_is_never_slower_than_qlearning() {
    let cfg = OffloadConfig::frozen_scenario();
    let gamma = 0.1;
    let oracle = solve(&cfg, gamma);
    let hp = exploration_hp(gamma, 0.9999);
    let max_steps = 60_000;
    let mut q_steps = Vec::new();
    let mut pds_steps = Vec::new();
    for seed in 0..10 {
        let (hit_q, _) = train(
            &cfg,
            Learner::Tabular { plan_steps: 0 },
            hp,
            100 + seed,
            max_steps,
            1000,
            &oracle,
            0.90,
        );
        let (hit_p, match_p) = train(
            &cfg,
            Learner::PostDecision,
            hp,
            100 + seed,
            max_steps,
            1000,
            &oracle,
            0.90,
        );
        q_steps.push(hit_q.unwrap_or(max_steps + 1));
        pds_steps.push(hit_p.unwrap_or(max_steps + 1));
        assert!(match_p >= 0.90, "seed {seed}: pds final match {match_p}");
    }
    let med_q = median(q_steps);
    let med_p = median(pds_steps);
    eprintln!("median steps to 90% match: qlearn {med_q}, pds {med_p}");
    assert!(med_p <= med_q, "pds {med_p} slower than qlearn {med_q}");
}
