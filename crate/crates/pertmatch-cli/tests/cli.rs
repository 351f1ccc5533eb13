//! End-to-end tests of the `pertmatch` binary: file outputs, replay
//! determinism, the frozen CSV schema, and the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pertmatch_cli::commands::{CONCENTRATION_CSV_HEADER, RESULTS_CSV_HEADER, TOOL_VERSION};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pertmatch"));
    // Keep the environment out of output-path resolution unless a test
    // opts in explicitly.
    cmd.env_remove("PERTMATCH_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(output),
        stderr(output)
    );
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_writes_instance_sidecar_and_replayable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // The contract spelling `instance1` is an alias of `layered-triangle`.
    let output = run(&[
        "generate", "instance1", "--alpha", "0.5", "--beta", "0.5", "--n", "6", "--m", "3",
        "--out", out,
    ]);
    assert_exit(&output, 0);

    let instance_path = dir.path().join("layered-triangle.json");
    let meta_path = dir.path().join("layered-triangle.meta.json");
    let config_path = dir.path().join("layered-triangle.config.json");
    assert!(instance_path.exists() && meta_path.exists() && config_path.exists());

    let meta = json(&meta_path);
    assert_eq!(meta["tool_version"], TOOL_VERSION);
    assert_eq!(meta["family"], "layered-triangle");
    assert_eq!(meta["opt_exact"], true);
    assert!(meta["opt_closed_form"].as_f64().unwrap() > 0.0);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(meta["params"]["alpha"], 0.5);

    // Replaying the emitted config reproduces every artifact byte for byte.
    let before = (
        fs::read(&instance_path).unwrap(),
        fs::read(&meta_path).unwrap(),
        fs::read(&config_path).unwrap(),
    );
    fs::remove_file(&instance_path).unwrap();
    let replay = run(&["--config", config_path.to_str().unwrap()]);
    assert_exit(&replay, 0);
    assert_eq!(fs::read(&instance_path).unwrap(), before.0);
    assert_eq!(fs::read(&meta_path).unwrap(), before.1);
    assert_eq!(fs::read(&config_path).unwrap(), before.2);
}

#[test]
fn simulate_writes_report_and_frozen_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_exit(
        &run(&["generate", "budgeted-triangle", "--n", "8", "--mode", "adwords", "--out", out]),
        0,
    );
    let instance = dir.path().join("budgeted-triangle.json");
    let output = run(&[
        "simulate", "--instance", instance.to_str().unwrap(), "--alg", "msvv", "--step", "1e-3",
        "--out", out,
    ]);
    assert_exit(&output, 0);
    assert!(stdout(&output).contains("msvv"));

    let report = json(&dir.path().join("msvv-budgeted-triangle.report.json"));
    assert_eq!(report["tool_version"], TOOL_VERSION);
    assert_eq!(report["family"], "budgeted-triangle");
    assert_eq!(report["estimate"]["opt_source"], "closed-form");
    assert_eq!(report["estimate"]["trials"], 1);
    let ratio = report["estimate"]["mean"].as_f64().unwrap();
    assert!(ratio > 0.5 && ratio <= 1.0, "ratio {ratio}");
    // Deterministic single runs embed the run record with its allocation.
    assert_eq!(report["run"]["algorithm"], "msvv");
    assert_eq!(report["run"]["feasible"], true);
    assert!(report["run"]["allocation"].is_object());

    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], format!("# pertmatch v{TOOL_VERSION}"));
    assert_eq!(lines[1], RESULTS_CSV_HEADER);
    assert!(lines[2].starts_with("# config=") && lines[2].contains(&format!("v={TOOL_VERSION}")));
    let fields: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(fields.len(), 11);
    assert_eq!(fields[1], "msvv");
    assert_eq!(fields[2], "canonical");
    assert_eq!(fields[4], "0.001");
    assert_eq!(fields[5], ""); // deterministic: no seed column value
    assert_eq!(fields[6], "1");

    // A replay appends an identical row (and identical provenance comment).
    let config = dir.path().join("msvv-budgeted-triangle.config.json");
    assert_exit(&run(&["--config", config.to_str().unwrap()]), 0);
    let csv_after = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines_after: Vec<&str> = csv_after.lines().collect();
    assert_eq!(lines_after.len(), 6);
    assert_eq!(lines_after[4], lines[2]);
    assert_eq!(lines_after[5], lines[3]);
}

#[test]
fn randomized_simulation_records_master_seed_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_exit(&run(&["generate", "triangle", "--n", "6", "--out", out]), 0);
    let instance = dir.path().join("upper-triangle.json");
    let args = [
        "simulate", "--instance", instance.to_str().unwrap(), "--alg", "pr-integral",
        "--trials", "50", "--seed", "42", "--out", out,
    ];
    assert_exit(&run(&args), 0);
    let report_path = dir.path().join("pr-integral-upper-triangle.report.json");
    let first = fs::read(&report_path).unwrap();
    let report = json(&report_path);
    assert_eq!(report["estimate"]["seed"], 42);
    assert_eq!(report["estimate"]["per_trial"].as_array().unwrap().len(), 50);
    assert!(report["run"].is_null());

    assert_exit(&run(&args), 0);
    assert_eq!(fs::read(&report_path).unwrap(), first);

    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let row = csv.lines().nth(3).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[4], ""); // rank-based greedy: no step column value
    assert_eq!(fields[5], "42");
    assert_eq!(fields[6], "50");
}

#[test]
fn two_phase_grid_expectation_matches_the_contract_spelling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_exit(
        &run(&["generate", "instance2", "--alpha", "0.1", "--n", "40", "--out", out]),
        0,
    );
    let instance = dir.path().join("two-phase-spender.json");
    let output = run(&[
        "simulate", "--instance", instance.to_str().unwrap(), "--alg", "pr-adwords",
        "--ranks", "grid", "--y0-grid", "40", "--out", out,
    ]);
    assert_exit(&output, 0);
    let report = json(&dir.path().join("pr-adwords-two-phase-spender.report.json"));
    assert_eq!(report["estimate"]["trials"], 40);
    let mean = report["estimate"]["mean"].as_f64().unwrap();
    assert!(mean > 0.55 && mean < 0.70, "mean {mean}");
}

#[test]
fn duplicate_propagates_the_parents_exact_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_exit(&run(&["generate", "triangle", "--n", "3", "--out", out]), 0);
    let parent = dir.path().join("upper-triangle.json");
    assert_exit(
        &run(&["generate", "duplicate", "--input", parent.to_str().unwrap(), "--copies", "4", "--out", out]),
        0,
    );
    let meta = json(&dir.path().join("duplicated.meta.json"));
    assert_eq!(meta["copies_per_parent"], 4);
    assert_eq!(meta["opt_closed_form"], 3.0);
    assert_eq!(meta["opt_exact"], true);
    let parent_meta = json(&dir.path().join("upper-triangle.meta.json"));
    assert_eq!(meta["parent_hash"], parent_meta["instance_hash"]);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    // 2: argument errors (library-level and parse-level).
    assert_exit(
        &run(&["generate", "instance1", "--alpha", "2.0", "--beta", "0.5", "--n", "4", "--m", "2", "--out", out]),
        2,
    );
    assert_exit(&run(&["simulate", "--instance", "missing.json", "--alg", "nope"]), 2);

    // 3: algorithm/instance mode mismatch.
    assert_exit(
        &run(&["generate", "budgeted-triangle", "--n", "4", "--mode", "adwords", "--out", out]),
        0,
    );
    let budgeted = dir.path().join("budgeted-triangle.json");
    assert_exit(
        &run(&["simulate", "--instance", budgeted.to_str().unwrap(), "--alg", "pb", "--out", out]),
        3,
    );

    // 4: a guarded exact oracle cannot conclude at this size.
    assert_exit(
        &run(&["generate", "random", "--seed", "1", "--n-offline", "120", "--n-online", "4", "--mode", "adwords", "--out", out]),
        0,
    );
    let big = dir.path().join("random.json");
    assert_exit(
        &run(&["simulate", "--instance", big.to_str().unwrap(), "--alg", "msvv", "--opt", "exact", "--out", out]),
        4,
    );

    // 1: a conclusive verdict contrary to expectation.
    assert_exit(&run(&["verify-bounds", "--eq1", "--f", "linear"]), 1);
}

#[test]
fn verify_bounds_matches_the_contract_examples() {
    // Canonical f at the critical ratio: the scan certifies equality.
    let output = run(&["verify-bounds", "--eq1", "--f", "canonical", "--gamma", "0"]);
    assert_exit(&output, 0);
    let text = stdout(&output);
    assert!(text.contains("PASS"), "{text}");

    // The linear function violates the constraint; saying so is expected.
    let output = run(&["verify-bounds", "--eq1", "--f", "linear", "--expect-violation"]);
    assert_exit(&output, 0);
    assert!(stdout(&output).contains("VIOLATED"));

    // Uniqueness verdicts for both shapes.
    assert_exit(&run(&["verify-bounds", "--uniqueness", "--f", "canonical"]), 0);
    assert_exit(
        &run(&["verify-bounds", "--uniqueness", "--f", "linear", "--expect-canonical", "false"]),
        0,
    );

    // No checks requested.
    assert_exit(&run(&["verify-bounds"]), 2);
}

#[test]
fn infeasibility_certificate_runs_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&[
        "verify-bounds", "--gamma", "0.0003", "--delta", "0.05", "--out", out,
    ]);
    assert_exit(&output, 0);
    let report = json(&dir.path().join("verify-bounds.report.json"));
    let cert = &report["certificate"];
    assert_eq!(cert["infeasible"], true);
    assert_eq!(cert["conclusive"], true);
    assert!((cert["r"].as_f64().unwrap() - 0.999185).abs() < 1e-5);
    assert!((cert["integral"].as_f64().unwrap() - 0.368282).abs() < 5e-5);

    // γ = 0 is feasible (the canonical function attains it); the verdict is
    // conclusive, so expecting infeasibility exits 1 and expecting
    // feasibility exits 0.
    assert_exit(&run(&["verify-bounds", "--gamma", "0", "--delta", "0.05"]), 1);
    assert_exit(
        &run(&["verify-bounds", "--gamma", "0", "--delta", "0.05", "--expect-infeasible", "false"]),
        0,
    );
}

#[test]
fn concentration_reports_vacuity_and_enforces_the_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let csv_path = dir.path().join("concentration.csv");

    let output = run(&[
        "concentration", "--n", "100", "--eps", "0.45", "--trials", "20",
        "--out", out, "--csv", csv_path.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    assert!(stdout(&output).contains("vacuous"));
    let report = json(&dir.path().join("concentration.report.json"));
    assert_eq!(report["vacuous"], true);
    assert_eq!(report["tool_version"], TOOL_VERSION);

    let csv = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[1], CONCENTRATION_CSV_HEADER);
    assert!(lines[3].starts_with("100,0.45,"));

    // ε below the hypothesis threshold 4·n^(−1/4) at a non-vacuous n.
    let output = run(&["concentration", "--n", "10000", "--eps", "0.3", "--trials", "5"]);
    assert_exit(&output, 2);
    assert!(stderr(&output).contains("hypothesis"), "{}", stderr(&output));
}

#[test]
fn env_var_sets_the_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .env("PERTMATCH_OUT", dir.path())
        .args(["generate", "triangle", "--n", "3"])
        .output()
        .unwrap();
    assert_exit(&output, 0);
    assert!(dir.path().join("upper-triangle.json").exists());
    // The pinned config replays into the same directory without the env var.
    let config = dir.path().join("upper-triangle.config.json");
    let stored: serde_json::Value = json(&config);
    assert_eq!(stored["out"], dir.path().to_str().unwrap());
}

#[test]
fn sidecar_drift_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_exit(&run(&["generate", "triangle", "--n", "4", "--out", out]), 0);
    let instance = dir.path().join("upper-triangle.json");
    // Tamper with the instance; the sidecar hash no longer matches.
    let tampered = fs::read_to_string(&instance)
        .unwrap()
        .replacen("\"count\": 4", "\"count\": 5", 1);
    fs::write(&instance, tampered).unwrap();
    let output = run(&[
        "simulate", "--instance", instance.to_str().unwrap(), "--alg", "pb", "--out", out,
    ]);
    assert_exit(&output, 2);
    assert!(stderr(&output).contains("sidecar"));
}
