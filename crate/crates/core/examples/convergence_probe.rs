//! Scratch diagnostics for the frozen scenarios: oracle gap structure and
//! learning curves of the tabular agents. Not part of the test suite.

use mecrl_core::agents::{AlphaMode, DynaModel, QLearningAgent};
use mecrl_core::offload::{enumerate_mdp, FrozenGround, OffloadAction, OffloadConfig, OffloadEnv};
use mecrl_core::oracle::{policy_match, reachable_states, value_iteration};
use mecrl_core::params::{AgentHyperparams, EpsilonSchedule};
use mecrl_core::rng::{SeededRng, Stream};

fn gap_stats(cfg: &OffloadConfig, gamma: f64) {
    let mdp = enumerate_mdp(cfg, gamma).unwrap();
    let sol = value_iteration(&mdp, 1e-9).unwrap();
    let mut gaps = Vec::new();
    for s in 0..mdp.states {
        let mut qs: Vec<f64> = (0..mdp.actions)
            .map(|a| {
                let row = mdp.row(s, a);
                let cont: f64 = row.iter().zip(sol.values.iter()).map(|(p, v)| p * v).sum();
                mdp.reward_at(s, a) + gamma * cont
            })
            .collect();
        qs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        gaps.push(qs[0] - qs[1]);
    }
    gaps.sort_by(f64::total_cmp);
    let pct = |p: f64| gaps[((gaps.len() - 1) as f64 * p) as usize];
    println!(
        "gamma {gamma}: top-2 gap min {:.4} p10 {:.4} p25 {:.4} median {:.4} p75 {:.4}",
        gaps[0],
        pct(0.10),
        pct(0.25),
        pct(0.50),
        pct(0.75)
    );
    let ties = gaps.iter().filter(|&&g| g < 1e-9).count();
    println!("  exact ties: {ties} of {} states", gaps.len());
}

fn curve(cfg: &OffloadConfig, gamma: f64, plan_steps: usize, seed: u64, max_steps: usize) {
    let mdp = enumerate_mdp(cfg, gamma).unwrap();
    let sol = value_iteration(&mdp, 1e-9).unwrap();
    let ground = FrozenGround::new(cfg).unwrap();
    let reachable = reachable_states(&mdp, &sol.policy, ground.canonical_start());

    let hp = AgentHyperparams {
        alpha: 0.7,
        gamma,
        epsilon0: 1.0,
        epsilon_min: 0.05,
        epsilon_decay: 0.99998,
    };
    let (mut env, _) = OffloadEnv::reset(cfg.clone(), seed).unwrap();
    let mut explore = SeededRng::for_stream(seed, Stream::AgentExplore);
    let mut plan_rng = SeededRng::for_stream(seed, Stream::Planning);
    let mut sched = EpsilonSchedule::new(&hp);
    let mut agent =
        QLearningAgent::new(ground.states(), ground.num_actions(), hp, AlphaMode::VisitDecay);
    let mut model = DynaModel::new(ground.num_actions());
    let mut state = env.ground_state_index(&ground);
    print!("gamma {gamma} K {plan_steps} seed {seed}:");
    for step in 0..max_steps {
        let eps = sched.step();
        let a = agent.select(state, eps, &mut explore);
        let (_, rb) = env.step(OffloadAction::from_index(cfg, a)).unwrap();
        let next = env.ground_state_index(&ground);
        agent.observe(state, a, rb.utility, next);
        if plan_steps > 0 {
            model.record(state, a, rb.utility, next);
            model.plan(&mut agent.table, plan_steps, &hp, AlphaMode::VisitDecay, &mut plan_rng);
        }
        state = next;
        if (step + 1) % (max_steps / 10) == 0 {
            let m = policy_match(&agent.table.policy(), &sol.policy, &reachable);
            print!(" {:.3}", m);
        }
    }
    println!();
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("gaps");
    let cfg = OffloadConfig::frozen_scenario();
    match mode {
        "gaps" => {
            for gamma in [0.1, 0.3, 0.5] {
                gap_stats(&cfg, gamma);
            }
        }
        "curve" => {
            let gamma: f64 = args[2].parse().unwrap();
            let plan: usize = args[3].parse().unwrap();
            let steps: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(200_000);
            for seed in 0..3u64 {
                curve(&cfg, gamma, plan, seed, steps);
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}
