//! End-to-end checks of the command-line surface: config round-trips,
//! strict key checking, exit codes, output files, and the pretrain /
//! hotboot flow.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mecrl"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn print_default_config_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    for scenario in ["offload", "auth"] {
        let out = bin().args(["print-default-config", scenario]).output().unwrap();
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains(&format!("scenario = {scenario}")));
        // The emitted text is itself a loadable config.
        let cfg_path = dir.path().join(format!("{scenario}.cfg"));
        let shortened = format!("{text}\nslots = 50\nruns = 1\n");
        // Remove the duplicate keys the append would create.
        let shortened = shortened
            .lines()
            .filter(|l| !l.starts_with("slots =") && !l.starts_with("runs ="))
            .collect::<Vec<_>>()
            .join("\n")
            + "\nslots = 50\nruns = 1\n";
        write(&cfg_path, &shortened);
        let out_dir = dir.path().join(scenario);
        let run = bin()
            .args(["run", cfg_path.to_str().unwrap(), "--quiet", "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        assert!(out_dir.join(format!("{scenario}_qlearn.csv")).exists());
        assert!(out_dir.join(format!("{scenario}_qlearn_summary.txt")).exists());
    }
}

#[test]
fn unknown_keys_and_bad_values_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.cfg");
    write(&cfg, "scenario = offload\nnum_eges = 3\n");
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("num_eges"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");

    let cfg = dir.path().join("invalid.cfg");
    write(&cfg, "scenario = offload\noffload.num_edges = 0\n");
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_edges"));
}

#[test]
fn compare_exit_code_reflects_orderings() {
    let dir = tempfile::tempdir().unwrap();
    let fixed = dir.path().join("fixed.cfg");
    let random = dir.path().join("random.cfg");
    let shared = "scenario = offload\nslots = 500\nruns = 3\nbase_seed = 5\n";
    write(&fixed, &format!("{shared}agent = fixed\n"));
    write(&random, &format!("{shared}agent = random\n"));

    // Best-in-hindsight static action beats uniform random play.
    let good = bin()
        .args(["compare", fixed.to_str().unwrap(), random.to_str().unwrap(), "--quiet"])
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stderr));

    // Listing them worst-first fails the requested ordering.
    let bad = bin()
        .args(["compare", random.to_str().unwrap(), fixed.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));

    // Mismatched scenarios are a usage error, not an ordering failure.
    let auth = dir.path().join("auth.cfg");
    write(&auth, "scenario = auth\nslots = 500\nruns = 3\nbase_seed = 5\n");
    let mixed = bin()
        .args(["compare", fixed.to_str().unwrap(), auth.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(mixed.status.code(), Some(2));
}

#[test]
fn oracle_check_runs_on_a_frozen_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("frozen.cfg");
    write(
        &cfg,
        "scenario = offload\nagent = qlearn\nslots = 20000\nruns = 2\n\
         offload.frozen = true\noffload.jammer.sweep_period_slots = 1\n\
         offload.num_edges = 2\noffload.num_rate_levels = 2\n\
         offload.device_gain_levels = 0.1,0.4\noffload.jam_gain_levels = 1.0\n\
         offload.bandwidth_levels_mhz = 4\noffload.user_density_levels = 1\n\
         offload.jammer.distance_to_edge_m = 20,25\n\
         agent.alpha_mode = visit-decay\nagent.epsilon_min = 0.05\n",
    );
    let out = bin().args(["oracle-check", cfg.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("policy match"), "{text}");
    assert!(text.contains("median_match"), "{text}");

    // Non-frozen configs are refused with an explanation.
    let bad = dir.path().join("thawed.cfg");
    write(&bad, "scenario = offload\nagent = qlearn\nslots = 100\nruns = 1\n");
    let out = bin().args(["oracle-check", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frozen"));
}

#[test]
fn pretrain_then_hotboot_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pre.cfg");
    write(
        &cfg,
        "scenario = offload\nagent = dqn\nslots = 300\nruns = 1\n\
         pretrain.scenarios = 2\npretrain.slots_per_scenario = 200\n",
    );
    let weights = dir.path().join("weights.txt");
    let out = bin()
        .args(["pretrain", cfg.to_str().unwrap(), "-o"])
        .arg(&weights)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&weights).unwrap();
    assert!(text.starts_with("qnet-weights v1\n"), "{}", &text[..40.min(text.len())]);

    let hot = dir.path().join("hot.cfg");
    write(
        &hot,
        &format!(
            "scenario = offload\nagent = dqn-hotboot\nslots = 300\nruns = 1\n\
             agent.hotboot_weights = {}\n",
            weights.display()
        ),
    );
    let out_dir = dir.path().join("out");
    let run = bin()
        .args(["run", hot.to_str().unwrap(), "--quiet", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out_dir.join("offload_dqn-hotboot.csv").exists());

    // A missing weights file is a validation error naming the key.
    let missing = dir.path().join("missing.cfg");
    write(
        &missing,
        "scenario = offload\nagent = dqn-hotboot\nslots = 10\nruns = 1\n\
         agent.hotboot_weights = /no/such/weights.txt\n",
    );
    let out = bin().args(["run", missing.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hotboot_weights"));
}

#[test]
fn zero_slot_runs_emit_headers_and_no_data_markers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    write(&cfg, "scenario = auth\nagent = random\nslots = 0\nruns = 2\n");
    let out_dir = dir.path().join("out");
    let run = bin()
        .args(["run", cfg.to_str().unwrap(), "--quiet", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(run.status.success());
    let csv = std::fs::read_to_string(out_dir.join("auth_random.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "only the header expected: {csv}");
    let summary = std::fs::read_to_string(out_dir.join("auth_random_summary.txt")).unwrap();
    assert!(summary.contains("no data"), "{summary}");
    assert!(summary.contains("median_asymptote_utility = no-data"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("seed.cfg");
    write(&cfg, "scenario = offload\nagent = random\nslots = 50\nruns = 1\nbase_seed = 1\n");
    let mut csvs = Vec::new();
    for (label, seed) in [("s1", "123"), ("s2", "123"), ("s3", "456")] {
        let out_dir = dir.path().join(label);
        let run = bin()
            .args(["run", cfg.to_str().unwrap(), "--quiet", "--seed", seed, "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(run.status.success());
        csvs.push(std::fs::read(out_dir.join("offload_random.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_ne!(csvs[0], csvs[2], "--seed had no effect");
}
