//! Multi-scheme comparison: run several agent configurations on identical
//! scenarios and seeds, align runs pairwise, and check that the configs
//! are listed best-first (asymptotic utility per seed, convergence time by
//! median).

use std::fmt::Write as _;

use crate::config::{AgentKind, ExperimentConfig};
use crate::experiment::simulate_experiment;
use crate::metrics::{fmt_float, median_f64, median_u64, SummaryReport};
use crate::HarnessError;

#[derive(Clone, Debug)]
pub struct PairVerdict {
    pub first: AgentKind,
    pub second: AgentKind,
    pub runs: usize,
    /// Seeds where the first config's asymptotic utility is at least the
    /// second's.
    pub asymptote_wins: usize,
    /// Seeds where the first config converges no later than the second.
    pub convergence_wins: usize,
    pub median_asymptote: (f64, f64),
    pub median_convergence: (u64, u64),
    pub asymptote_pass: bool,
    pub convergence_pass: bool,
    /// Convergence ordering only gates pairs of learning agents; a flat
    /// baseline "converges" at the first window by construction.
    pub convergence_applies: bool,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub summaries: Vec<SummaryReport>,
    pub pairs: Vec<PairVerdict>,
    /// All requested orderings hold.
    pub pass: bool,
}

/// Run every config and grade each adjacent pair. Configs must share the
/// scenario, run count, slot count, and base seed.
pub fn compare(cfgs: &[ExperimentConfig]) -> Result<ComparisonReport, HarnessError> {
    if cfgs.len() < 2 {
        return Err(HarnessError::Usage("compare needs at least two configs".into()));
    }
    let head = &cfgs[0];
    for (i, cfg) in cfgs.iter().enumerate().skip(1) {
        if cfg.scenario != head.scenario {
            return Err(HarnessError::Usage(format!(
                "config {i} runs scenario `{}` but config 0 runs `{}`; \
                 comparisons need one scenario",
                cfg.scenario.name(),
                head.scenario.name()
            )));
        }
        if cfg.runs != head.runs || cfg.slots != head.slots || cfg.base_seed != head.base_seed {
            return Err(HarnessError::Usage(format!(
                "config {i} has runs/slots/base_seed {}/{}/{}, expected {}/{}/{} \
                 so seeds align pairwise",
                cfg.runs, cfg.slots, cfg.base_seed, head.runs, head.slots, head.base_seed
            )));
        }
    }
    let min_frac = head.compare_min_seed_frac;
    let summaries: Vec<SummaryReport> = cfgs
        .iter()
        .map(|cfg| simulate_experiment(cfg).map(|r| r.summary))
        .collect::<Result<_, _>>()?;

    let mut pairs = Vec::new();
    let mut pass = true;
    for window in summaries.windows(2) {
        let (a, b) = (&window[0], &window[1]);
        let runs = a.per_run.len().min(b.per_run.len());
        let need = (min_frac * runs as f64).ceil() as usize;
        let mut asymptote_wins = 0;
        let mut convergence_wins = 0;
        for (ra, rb) in a.per_run.iter().zip(b.per_run.iter()) {
            if ra.asymptote_utility >= rb.asymptote_utility {
                asymptote_wins += 1;
            }
            if ra.slots_to_90pct <= rb.slots_to_90pct {
                convergence_wins += 1;
            }
        }
        let median_asymptote = (
            median_f64(&a.per_run.iter().map(|r| r.asymptote_utility).collect::<Vec<_>>()),
            median_f64(&b.per_run.iter().map(|r| r.asymptote_utility).collect::<Vec<_>>()),
        );
        let median_convergence = (
            median_u64(&a.per_run.iter().map(|r| r.slots_to_90pct).collect::<Vec<_>>()),
            median_u64(&b.per_run.iter().map(|r| r.slots_to_90pct).collect::<Vec<_>>()),
        );
        let convergence_applies = a.agent.is_learner() && b.agent.is_learner();
        let verdict = PairVerdict {
            first: a.agent,
            second: b.agent,
            runs,
            asymptote_wins,
            convergence_wins,
            median_asymptote,
            median_convergence,
            asymptote_pass: asymptote_wins >= need,
            convergence_pass: !convergence_applies
                || median_convergence.0 <= median_convergence.1,
            convergence_applies,
        };
        pass &= verdict.asymptote_pass && verdict.convergence_pass;
        pairs.push(verdict);
    }
    Ok(ComparisonReport { summaries, pairs, pass })
}

/// Human-readable comparison plus the machine block.
pub fn render_comparison(report: &ComparisonReport) -> String {
    let mut s = String::new();
    let names: Vec<&str> = report.summaries.iter().map(|r| r.agent.name()).collect();
    let _ = writeln!(s, "comparison: {}", names.join(" vs "));
    for p in &report.pairs {
        let conv_tag = if !p.convergence_applies {
            "n/a: baseline"
        } else if p.convergence_pass {
            "pass"
        } else {
            "FAIL"
        };
        let _ = writeln!(
            s,
            "{} vs {}: asymptote {}/{} seeds (medians {:.4} vs {:.4}) [{}], \
             convergence medians {} vs {} slots [{}]",
            p.first.name(),
            p.second.name(),
            p.asymptote_wins,
            p.runs,
            p.median_asymptote.0,
            p.median_asymptote.1,
            if p.asymptote_pass { "pass" } else { "FAIL" },
            p.median_convergence.0,
            p.median_convergence.1,
            conv_tag,
        );
    }
    let _ = writeln!(s, "verdict: {}", if report.pass { "pass" } else { "FAIL" });
    let _ = writeln!(s, "[machine]");
    let _ = writeln!(s, "pass = {}", report.pass);
    for (i, p) in report.pairs.iter().enumerate() {
        let _ = writeln!(s, "pair{i}.first = {}", p.first.name());
        let _ = writeln!(s, "pair{i}.second = {}", p.second.name());
        let _ = writeln!(s, "pair{i}.asymptote_wins = {}", p.asymptote_wins);
        let _ = writeln!(s, "pair{i}.runs = {}", p.runs);
        let _ = writeln!(s, "pair{i}.median_asymptote_first = {}", fmt_float(p.median_asymptote.0));
        let _ = writeln!(s, "pair{i}.median_asymptote_second = {}", fmt_float(p.median_asymptote.1));
        let _ = writeln!(s, "pair{i}.median_convergence_first = {}", p.median_convergence.0);
        let _ = writeln!(s, "pair{i}.median_convergence_second = {}", p.median_convergence.1);
        let _ = writeln!(s, "pair{i}.asymptote_pass = {}", p.asymptote_pass);
        let _ = writeln!(s, "pair{i}.convergence_applies = {}", p.convergence_applies);
        let _ = writeln!(s, "pair{i}.convergence_pass = {}", p.convergence_pass);
    }
    s
}
