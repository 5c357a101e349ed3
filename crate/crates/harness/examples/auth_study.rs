//! Threshold adaptation under a shifting spoofing campaign: the learned
//! policy against the full fixed-threshold sweep, per seed.
//!
//! ```bash
//! cargo run --release -p mecrl-harness --example auth_study [runs]
//! ```

use mecrl_core::agents::AlphaMode;
use mecrl_harness::config::{AgentKind, ExperimentConfig, Scenario};
use mecrl_harness::experiment::simulate_experiment;
use mecrl_harness::metrics::RunSummary;

fn error_rate(r: &RunSummary) -> f64 {
    (r.whole_run_far.unwrap() + r.whole_run_mdr.unwrap()) / 2.0
}

fn main() {
    let runs: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(10);
    let slots = 20_000u64;

    let mut base = ExperimentConfig::default_for(Scenario::Auth);
    base.slots = slots;
    base.runs = runs;
    // Noisier channel estimates and a subtler spoofer than the defaults,
    // so no single threshold is good in both schedule phases.
    base.auth.legit_noise_sigma = 0.18;
    base.auth.spoof_offset = 0.22;
    base.auth.spoof_prob_schedule = vec![(0, 0.1), (slots / 2, 0.5)];

    let grid_len = base.auth.threshold_grid.len();
    let mut best_fixed = vec![f64::INFINITY; runs as usize];
    for idx in 0..grid_len {
        let mut cfg = base.clone();
        cfg.agent = AgentKind::Fixed;
        cfg.agent_opts.fixed_action = Some(idx);
        let summary = simulate_experiment(&cfg).unwrap().summary;
        for (run, r) in summary.per_run.iter().enumerate() {
            best_fixed[run] = best_fixed[run].min(error_rate(r));
        }
    }

    let mut cfg = base;
    cfg.agent = AgentKind::QLearn;
    cfg.agent_opts.alpha_mode = AlphaMode::VisitDecay;
    cfg.agent_opts.obs_bins = 3;
    let summary = simulate_experiment(&cfg).unwrap().summary;

    let mut wins = 0;
    for (run, r) in summary.per_run.iter().enumerate() {
        let rl = error_rate(r);
        let won = rl < best_fixed[run];
        wins += usize::from(won);
        println!(
            "seed {run}: adaptive (FAR+MDR)/2 = {rl:.4}, best fixed threshold = {:.4} -> {}",
            best_fixed[run],
            if won { "adaptive wins" } else { "fixed wins" }
        );
    }
    println!("adaptive policy beats the best fixed threshold in {wins}/{runs} seeds");
}
