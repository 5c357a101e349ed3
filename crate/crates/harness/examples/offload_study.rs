//! Runs the full offloading comparison in-process: every defense scheme on
//! the default scenario with aligned seeds, including hotboot pretraining,
//! then prints the per-agent summaries.
//!
//! ```bash
//! cargo run --release -p mecrl-harness --example offload_study [slots] [runs]
//! ```

use mecrl_harness::config::{AgentKind, ExperimentConfig, Scenario};
use mecrl_harness::experiment::simulate_experiment;
use mecrl_harness::metrics::median_u64;
use mecrl_harness::pretrain::pretrain;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let slots: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(10_000);
    let runs: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(10);

    let base = |agent: AgentKind| -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default_for(Scenario::Offload);
        cfg.agent = agent;
        cfg.slots = slots;
        cfg.runs = runs;
        cfg.agent_opts.hyper.epsilon_decay = 0.99;
        cfg
    };

    let dir = std::env::temp_dir().join("mecrl_offload_study");
    std::fs::create_dir_all(&dir).unwrap();
    let weights = dir.join("pretrained.txt");
    let t = std::time::Instant::now();
    pretrain(&base(AgentKind::Dqn), &weights).unwrap();
    println!("pretraining: {:.1}s", t.elapsed().as_secs_f64());

    for agent in [
        AgentKind::Random,
        AgentKind::Fixed,
        AgentKind::QLearn,
        AgentKind::DynaQ,
        AgentKind::Dqn,
        AgentKind::DqnHotboot,
    ] {
        let mut cfg = base(agent);
        if agent == AgentKind::DqnHotboot {
            cfg.agent_opts.hotboot_weights = Some(weights.clone());
            cfg.agent_opts.hyper.epsilon0 = 0.2;
        }
        let t = std::time::Instant::now();
        let summary = simulate_experiment(&cfg).unwrap().summary;
        let conv =
            median_u64(&summary.per_run.iter().map(|r| r.slots_to_90pct).collect::<Vec<_>>());
        let mean = |f: fn(&mecrl_harness::metrics::RunSummary) -> f64| -> f64 {
            summary.per_run.iter().map(f).sum::<f64>() / summary.per_run.len() as f64
        };
        println!(
            "{:>12}: utility {:+.3}, convergence {:>5} slots, sinr {:5.2}, \
             energy {:.4} J, delay {:.4} s  ({:.1}s)",
            agent.name(),
            summary.median_asymptote_utility.unwrap(),
            conv,
            mean(|r| r.mean_sinr.unwrap()),
            mean(|r| r.mean_energy_j.unwrap()),
            mean(|r| r.mean_delay_s.unwrap()),
            t.elapsed().as_secs_f64(),
        );
    }
}
