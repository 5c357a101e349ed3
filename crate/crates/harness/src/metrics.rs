//! Per-slot metrics rows, deterministic CSV output, and the summary
//! statistics derived from them. Summaries are pure functions of the rows,
//! so anything written to disk can be recomputed from the CSV alone.

use std::fmt::Write as _;

use crate::config::{AgentKind, Scenario};
use mecrl_core::auth::{Decision, Truth};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("csv line {line}: {reason}")]
    BadCsv { line: usize, reason: String },
}

/// Fixed float formatting for byte-identical output: 17 significant
/// digits, scientific notation, '.' separator.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffloadRow {
    pub run: u64,
    pub slot: u64,
    pub edge: usize,
    pub rate_level: usize,
    pub sinr: f64,
    pub ber: f64,
    pub energy_j: f64,
    pub delay_s: f64,
    pub utility: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuthRow {
    pub run: u64,
    pub slot: u64,
    pub theta_index: usize,
    pub theta: f64,
    pub truth: Truth,
    pub decision: Decision,
    pub reward: f64,
    pub recent_far: f64,
    pub recent_mdr: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rows {
    Offload(Vec<OffloadRow>),
    Auth(Vec<AuthRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Offload(rows) => rows.len(),
            Rows::Auth(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub const OFFLOAD_HEADER: &str =
    "run,slot,edge,rate_level,sinr,ber,energy_j,delay_s,utility,epsilon";
pub const AUTH_HEADER: &str =
    "run,slot,theta_index,theta,truth,decision,reward,recent_far,recent_mdr,epsilon";

/// Render rows as CSV text ('\n' line endings, header first).
pub fn to_csv(rows: &Rows) -> String {
    let mut out = String::new();
    match rows {
        Rows::Offload(rows) => {
            out.push_str(OFFLOAD_HEADER);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.run,
                    r.slot,
                    r.edge,
                    r.rate_level,
                    fmt_float(r.sinr),
                    fmt_float(r.ber),
                    fmt_float(r.energy_j),
                    fmt_float(r.delay_s),
                    fmt_float(r.utility),
                    fmt_float(r.epsilon),
                );
            }
        }
        Rows::Auth(rows) => {
            out.push_str(AUTH_HEADER);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.run,
                    r.slot,
                    r.theta_index,
                    fmt_float(r.theta),
                    match r.truth {
                        Truth::Legit => "legit",
                        Truth::Spoof => "spoof",
                    },
                    match r.decision {
                        Decision::Accept => "accept",
                        Decision::Reject => "reject",
                    },
                    fmt_float(r.reward),
                    fmt_float(r.recent_far),
                    fmt_float(r.recent_mdr),
                    fmt_float(r.epsilon),
                );
            }
        }
    }
    out
}

/// Parse CSV text produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Rows, MetricsError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(MetricsError::BadCsv {
        line: 1,
        reason: "empty file".into(),
    })?;
    let field = |line: usize, parts: &[&str], idx: usize| -> Result<String, MetricsError> {
        parts.get(idx).map(|s| s.to_string()).ok_or(MetricsError::BadCsv {
            line,
            reason: format!("missing column {idx}"),
        })
    };
    fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, MetricsError> {
        s.parse().map_err(|_| MetricsError::BadCsv {
            line,
            reason: format!("bad number `{s}`"),
        })
    }
    match header {
        h if h == OFFLOAD_HEADER => {
            let mut rows = Vec::new();
            for (idx, raw) in lines {
                let line = idx + 1;
                let parts: Vec<&str> = raw.split(',').collect();
                rows.push(OffloadRow {
                    run: num(line, &field(line, &parts, 0)?)?,
                    slot: num(line, &field(line, &parts, 1)?)?,
                    edge: num(line, &field(line, &parts, 2)?)?,
                    rate_level: num(line, &field(line, &parts, 3)?)?,
                    sinr: num(line, &field(line, &parts, 4)?)?,
                    ber: num(line, &field(line, &parts, 5)?)?,
                    energy_j: num(line, &field(line, &parts, 6)?)?,
                    delay_s: num(line, &field(line, &parts, 7)?)?,
                    utility: num(line, &field(line, &parts, 8)?)?,
                    epsilon: num(line, &field(line, &parts, 9)?)?,
                });
            }
            Ok(Rows::Offload(rows))
        }
        h if h == AUTH_HEADER => {
            let mut rows = Vec::new();
            for (idx, raw) in lines {
                let line = idx + 1;
                let parts: Vec<&str> = raw.split(',').collect();
                let truth = match field(line, &parts, 4)?.as_str() {
                    "legit" => Truth::Legit,
                    "spoof" => Truth::Spoof,
                    other => {
                        return Err(MetricsError::BadCsv {
                            line,
                            reason: format!("bad truth `{other}`"),
                        })
                    }
                };
                let decision = match field(line, &parts, 5)?.as_str() {
                    "accept" => Decision::Accept,
                    "reject" => Decision::Reject,
                    other => {
                        return Err(MetricsError::BadCsv {
                            line,
                            reason: format!("bad decision `{other}`"),
                        })
                    }
                };
                rows.push(AuthRow {
                    run: num(line, &field(line, &parts, 0)?)?,
                    slot: num(line, &field(line, &parts, 1)?)?,
                    theta_index: num(line, &field(line, &parts, 2)?)?,
                    theta: num(line, &field(line, &parts, 3)?)?,
                    truth,
                    decision,
                    reward: num(line, &field(line, &parts, 6)?)?,
                    recent_far: num(line, &field(line, &parts, 7)?)?,
                    recent_mdr: num(line, &field(line, &parts, 8)?)?,
                    epsilon: num(line, &field(line, &parts, 9)?)?,
                });
            }
            Ok(Rows::Auth(rows))
        }
        other => Err(MetricsError::BadCsv {
            line: 1,
            reason: format!("unrecognized header `{other}`"),
        }),
    }
}

/// Length of the last-20%-of-run tail used for asymptotic means.
pub fn tail_len(slots: u64) -> usize {
    ((slots as f64 * 0.2).floor() as usize).max(1).min(slots as usize)
}

/// Moving-average window for convergence detection. Wide enough that
/// threshold crossings reflect the learning curve, not slot-level noise.
pub fn smooth_window(slots: u64) -> usize {
    ((slots / 20) as usize).max(1)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// First slot count at which the trailing moving average reaches 90% of
/// the climb from initial to asymptotic utility; `slots` if never. A run
/// that starts at or above its asymptote (a warm-started agent, or one
/// that never improves) converges at the first full window.
pub fn slots_to_90pct(utilities: &[f64]) -> u64 {
    let slots = utilities.len() as u64;
    if utilities.is_empty() {
        return 0;
    }
    let w = smooth_window(slots);
    let u0 = mean(&utilities[..w.min(utilities.len())]);
    let u_inf = mean(&utilities[utilities.len() - tail_len(slots)..]);
    let threshold = u0 + 0.9 * (u_inf - u0);
    let mut window_sum: f64 = utilities[..w.min(utilities.len())].iter().sum();
    if window_sum / w as f64 >= threshold {
        return w as u64;
    }
    for t in w..utilities.len() {
        window_sum += utilities[t] - utilities[t - w];
        if window_sum / w as f64 >= threshold {
            return (t + 1) as u64;
        }
    }
    slots
}

/// Per-run summary statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub run: u64,
    /// Mean utility over the last 20% of slots.
    pub asymptote_utility: f64,
    pub slots_to_90pct: u64,
    pub mean_sinr: Option<f64>,
    pub mean_energy_j: Option<f64>,
    pub mean_delay_s: Option<f64>,
    pub whole_run_far: Option<f64>,
    pub whole_run_mdr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryReport {
    pub scenario: Scenario,
    pub agent: AgentKind,
    pub slots: u64,
    pub runs: u64,
    pub per_run: Vec<RunSummary>,
    pub median_asymptote_utility: Option<f64>,
    pub median_slots_to_90pct: Option<u64>,
    pub no_data: bool,
}

/// Upper median: element at index len/2 of the sorted values.
pub fn median_f64(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

pub fn median_u64(values: &[u64]) -> u64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    v[v.len() / 2]
}

/// Summarize metrics rows; pure so summaries can be recomputed from CSV.
pub fn summarize(scenario: Scenario, agent: AgentKind, slots: u64, runs: u64, rows: &Rows) -> SummaryReport {
    let mut per_run = Vec::new();
    if slots > 0 {
        for run in 0..runs {
            match rows {
                Rows::Offload(rows) => {
                    let run_rows: Vec<&OffloadRow> = rows.iter().filter(|r| r.run == run).collect();
                    if run_rows.is_empty() {
                        continue;
                    }
                    let utilities: Vec<f64> = run_rows.iter().map(|r| r.utility).collect();
                    let tail = &run_rows[run_rows.len() - tail_len(slots)..];
                    per_run.push(RunSummary {
                        run,
                        asymptote_utility: mean(
                            &tail.iter().map(|r| r.utility).collect::<Vec<_>>(),
                        ),
                        slots_to_90pct: slots_to_90pct(&utilities),
                        mean_sinr: Some(mean(&tail.iter().map(|r| r.sinr).collect::<Vec<_>>())),
                        mean_energy_j: Some(mean(
                            &tail.iter().map(|r| r.energy_j).collect::<Vec<_>>(),
                        )),
                        mean_delay_s: Some(mean(
                            &tail.iter().map(|r| r.delay_s).collect::<Vec<_>>(),
                        )),
                        whole_run_far: None,
                        whole_run_mdr: None,
                    });
                }
                Rows::Auth(rows) => {
                    let run_rows: Vec<&AuthRow> = rows.iter().filter(|r| r.run == run).collect();
                    if run_rows.is_empty() {
                        continue;
                    }
                    let utilities: Vec<f64> = run_rows.iter().map(|r| r.reward).collect();
                    let tail = &run_rows[run_rows.len() - tail_len(slots)..];
                    let legit: Vec<&&AuthRow> =
                        run_rows.iter().filter(|r| r.truth == Truth::Legit).collect();
                    let spoof: Vec<&&AuthRow> =
                        run_rows.iter().filter(|r| r.truth == Truth::Spoof).collect();
                    let far = if legit.is_empty() {
                        0.0
                    } else {
                        legit.iter().filter(|r| r.decision == Decision::Reject).count() as f64
                            / legit.len() as f64
                    };
                    let mdr = if spoof.is_empty() {
                        0.0
                    } else {
                        spoof.iter().filter(|r| r.decision == Decision::Accept).count() as f64
                            / spoof.len() as f64
                    };
                    per_run.push(RunSummary {
                        run,
                        asymptote_utility: mean(
                            &tail.iter().map(|r| r.reward).collect::<Vec<_>>(),
                        ),
                        slots_to_90pct: slots_to_90pct(&utilities),
                        mean_sinr: None,
                        mean_energy_j: None,
                        mean_delay_s: None,
                        whole_run_far: Some(far),
                        whole_run_mdr: Some(mdr),
                    });
                }
            }
        }
    }
    let no_data = per_run.is_empty();
    let median_asymptote_utility = if no_data {
        None
    } else {
        Some(median_f64(&per_run.iter().map(|r| r.asymptote_utility).collect::<Vec<_>>()))
    };
    let median_slots_to_90pct = if no_data {
        None
    } else {
        Some(median_u64(&per_run.iter().map(|r| r.slots_to_90pct).collect::<Vec<_>>()))
    };
    SummaryReport {
        scenario,
        agent,
        slots,
        runs,
        per_run,
        median_asymptote_utility,
        median_slots_to_90pct,
        no_data,
    }
}

/// Human-readable summary plus a machine-readable `[machine]` block.
pub fn render_summary(report: &SummaryReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "summary: {} scenario, {} agent, {} runs x {} slots",
        report.scenario.name(),
        report.agent.name(),
        report.runs,
        report.slots
    );
    if report.no_data {
        let _ = writeln!(s, "no data (zero slots or zero rows)");
    }
    for r in &report.per_run {
        let mut line = format!(
            "run {}: asymptote utility {:.4}, slots to 90% {}",
            r.run, r.asymptote_utility, r.slots_to_90pct
        );
        if let (Some(sinr), Some(e), Some(d)) = (r.mean_sinr, r.mean_energy_j, r.mean_delay_s) {
            let _ = write!(line, ", tail sinr {sinr:.4}, energy {e:.5} J, delay {d:.5} s");
        }
        if let (Some(far), Some(mdr)) = (r.whole_run_far, r.whole_run_mdr) {
            let _ = write!(line, ", whole-run FAR {far:.4}, MDR {mdr:.4}");
        }
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "[machine]");
    let _ = writeln!(s, "scenario = {}", report.scenario.name());
    let _ = writeln!(s, "agent = {}", report.agent.name());
    let _ = writeln!(s, "slots = {}", report.slots);
    let _ = writeln!(s, "runs = {}", report.runs);
    let _ = writeln!(s, "no_data = {}", report.no_data);
    match report.median_asymptote_utility {
        Some(v) => {
            let _ = writeln!(s, "median_asymptote_utility = {}", fmt_float(v));
        }
        None => {
            let _ = writeln!(s, "median_asymptote_utility = no-data");
        }
    }
    match report.median_slots_to_90pct {
        Some(v) => {
            let _ = writeln!(s, "median_slots_to_90pct = {v}");
        }
        None => {
            let _ = writeln!(s, "median_slots_to_90pct = no-data");
        }
    }
    for r in &report.per_run {
        let _ = writeln!(
            s,
            "run{}.asymptote_utility = {}",
            r.run,
            fmt_float(r.asymptote_utility)
        );
        let _ = writeln!(s, "run{}.slots_to_90pct = {}", r.run, r.slots_to_90pct);
        if let Some(v) = r.mean_sinr {
            let _ = writeln!(s, "run{}.tail_mean_sinr = {}", r.run, fmt_float(v));
        }
        if let Some(v) = r.mean_energy_j {
            let _ = writeln!(s, "run{}.tail_mean_energy_j = {}", r.run, fmt_float(v));
        }
        if let Some(v) = r.mean_delay_s {
            let _ = writeln!(s, "run{}.tail_mean_delay_s = {}", r.run, fmt_float(v));
        }
        if let Some(v) = r.whole_run_far {
            let _ = writeln!(s, "run{}.whole_run_far = {}", r.run, fmt_float(v));
        }
        if let Some(v) = r.whole_run_mdr {
            let _ = writeln!(s, "run{}.whole_run_mdr = {}", r.run, fmt_float(v));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits_and_roundtrips() {
        for x in [0.1, -3.25e-9, 123456.789, 1.0 / 3.0, 0.0, -0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn csv_roundtrip_offload() {
        let rows = Rows::Offload(vec![OffloadRow {
            run: 0,
            slot: 3,
            edge: 2,
            rate_level: 1,
            sinr: 1.5,
            ber: 0.2,
            energy_j: 0.01,
            delay_s: 0.5,
            utility: -0.25,
            epsilon: 0.9,
        }]);
        let text = to_csv(&rows);
        assert_eq!(from_csv(&text).unwrap(), rows);
    }

    #[test]
    fn csv_roundtrip_auth() {
        let rows = Rows::Auth(vec![AuthRow {
            run: 1,
            slot: 9,
            theta_index: 4,
            theta: 0.1333,
            truth: Truth::Spoof,
            decision: Decision::Reject,
            reward: 1.0,
            recent_far: 0.0,
            recent_mdr: 0.25,
            epsilon: 0.5,
        }]);
        let text = to_csv(&rows);
        assert_eq!(from_csv(&text).unwrap(), rows);
    }

    #[test]
    fn convergence_slot_detection() {
        // Step function: -1 for 100 slots, +1 afterwards.
        let mut u = vec![-1.0; 100];
        u.extend(vec![1.0; 400]);
        let t = slots_to_90pct(&u);
        assert!((100..=130).contains(&t), "got {t}");

        // Flat from the start: already at the asymptote, converges at the
        // first full window.
        let flat = vec![2.0; 300];
        assert_eq!(slots_to_90pct(&flat), smooth_window(300) as u64);
        let declining: Vec<f64> = (0..200).map(|i| -(i as f64)).collect();
        assert_eq!(slots_to_90pct(&declining), smooth_window(200) as u64);

        // A late spike crosses once the trailing window overlaps it.
        let mut late = vec![0.0; 100];
        late.extend(vec![0.5; 50]);
        late.extend(vec![10.0; 4]);
        assert_eq!(slots_to_90pct(&late), 151);
    }

    #[test]
    fn summary_handles_zero_slots() {
        let report = summarize(
            Scenario::Offload,
            AgentKind::Random,
            0,
            3,
            &Rows::Offload(vec![]),
        );
        assert!(report.no_data);
        assert_eq!(report.median_asymptote_utility, None);
        let text = render_summary(&report);
        assert!(text.contains("no data"));
        assert!(text.contains("median_asymptote_utility = no-data"));
    }

    #[test]
    fn medians_use_upper_median() {
        assert_eq!(median_u64(&[1, 2, 3, 4]), 3);
        assert_eq!(median_f64(&[1.0, 2.0, 4.0]), 2.0);
    }
}
