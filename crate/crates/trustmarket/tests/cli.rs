//! Integration tests for the `trustmarket` binary: exit codes, stdout and
//! stderr contracts, and agreement between the CLI and the library API.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use trustmarket::sim::{AgentProfile, Attack, Role, ScenarioConfig, SellerSelection};
use trustmarket::{
    canonical_json, ComputeMode, EngineConfig, EngineParams, PrincipalId, QueryContext,
    Repository, TrustEngine,
};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_trustmarket"));
    cmd.env_remove("TRUST_CONFIG");
    cmd
}

/// Writes a standard-tier config whose repository lives under `dir/repo`.
fn write_config(dir: &Path) -> PathBuf {
    let config = EngineConfig {
        params: EngineParams::standard(),
        repository: dir.join("repo"),
    };
    let path = dir.join("market.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn run(config: &Path, args: &[&str]) -> Output {
    bin().arg("--config").arg(config).args(args).output().unwrap()
}

fn ok_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "expected success, got {:?} with stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout must be one JSON document")
}

fn err_json(output: &Output) -> Value {
    assert_eq!(output.status.code(), Some(1), "domain errors exit 1: {output:?}");
    serde_json::from_slice(&output.stderr).expect("stderr must carry a JSON error")
}

fn attrs(salt: &str, email: bool, payment: bool, gov: bool) -> String {
    serde_json::json!({
        "email": { "value": format!("e:{salt}"), "verified": email },
        "payment": { "value": format!("p:{salt}"), "verified": payment },
        "gov_id": { "value": format!("g:{salt}"), "verified": gov },
    })
    .to_string()
}

#[test]
fn full_flow_matches_library_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());

    let init = ok_json(&run(&config, &["init"]));
    assert_eq!(init["version"], 0);

    let alice = ok_json(&run(
        &config,
        &["register", "--attrs", &attrs("alice", true, true, true), "--tier", "standard", "--id", "alice"],
    ));
    assert_eq!(alice["principal"], "alice");
    assert_eq!(alice["verification"]["score"], 1.0);
    assert_eq!(alice["linked_to"], Value::Null);
    assert_eq!(alice["version"], 1);

    let bob = ok_json(&run(
        &config,
        &["register", "--attrs", &attrs("bob", true, true, true), "--tier", "standard", "--id", "bob"],
    ));
    assert_eq!(bob["version"], 2);

    let tx = ok_json(&run(
        &config,
        &[
            "tx", "--buyer", "alice", "--seller", "bob", "--cost", "120.00",
            "--scope", "electronics", "--promised", "5", "--actual", "6",
        ],
    ));
    assert_eq!(tx["tx_id"], "t1");
    assert_eq!(tx["version"], 3);

    let rate = ok_json(&run(
        &config,
        &["rate", "--rater", "alice", "--ratee", "bob", "--tx", "t1", "--value", "0.8"],
    ));
    assert_eq!(rate["version"], 4);

    // Re-rating the same pair overwrites rather than accumulates.
    let rerate = ok_json(&run(
        &config,
        &["rate", "--rater", "alice", "--ratee", "bob", "--tx", "t1", "--value", "0.9"],
    ));
    assert_eq!(rerate["version"], 5);

    let opinion_cmd = ["opinion", "--viewer", "alice", "--subject", "bob"];
    let atc = run(&config, &opinion_cmd);
    let opinion = ok_json(&atc);
    assert_eq!(opinion["repo_version"], 5);
    assert_eq!(opinion["direct"]["value"], 0.9);
    assert_eq!(opinion["direct"]["support"], 1);
    // (0.2 * 1.0 + 0.3 * 0.9) / 0.5 with the recommendation absent.
    let score = opinion["score"].as_f64().unwrap();
    assert!((score - 0.94).abs() <= 1e-12, "got {score}");

    // Cached and fresh modes print identical bytes.
    let dtc = run(&config, &["opinion", "--viewer", "alice", "--subject", "bob", "--mode", "dtc"]);
    assert_eq!(atc.stdout, dtc.stdout);

    // The binary and the library agree byte for byte on the same log.
    let log = std::fs::read_to_string(dir.path().join("repo").join("log.jsonl")).unwrap();
    let repo = Repository::replay(Repository::events_from_jsonl(&log).unwrap()).unwrap();
    let engine = TrustEngine::from_parts(repo, EngineParams::standard()).unwrap();
    let lib_opinion = engine
        .opinion(
            &PrincipalId::new("alice"),
            &PrincipalId::new("bob"),
            &QueryContext::any(),
            ComputeMode::Dtc,
        )
        .unwrap();
    assert_eq!(
        canonical_json(&lib_opinion),
        String::from_utf8(atc.stdout).unwrap().trim_end()
    );
}

#[test]
fn domain_errors_exit_1_with_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    ok_json(&run(&config, &["init"]));
    for (id, gov) in [("a", true), ("b", true), ("c", true), ("ghost", false)] {
        ok_json(&run(
            &config,
            &["register", "--attrs", &attrs(id, gov, gov, gov), "--tier", "standard", "--id", id],
        ));
    }
    ok_json(&run(
        &config,
        &["tx", "--buyer", "a", "--seller", "b", "--cost", "50.00", "--scope", "general",
          "--promised", "5", "--actual", "5"],
    ));

    // Rating a transaction you were not part of.
    let err = err_json(&run(
        &config,
        &["rate", "--rater", "c", "--ratee", "b", "--tx", "t1", "--value", "1.0"],
    ));
    assert_eq!(err["error"], "NotAParty");
    assert!(err["message"].as_str().unwrap().contains("t1"));

    // An unknown tier is also a domain error, reported before any write.
    let err = err_json(&run(
        &config,
        &["register", "--attrs", &attrs("t", true, true, true), "--tier", "platinum"],
    ));
    assert_eq!(err["error"], "UnknownTier");
}

#[test]
fn rejected_commands_leave_no_events_behind() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    ok_json(&run(&config, &["init"]));
    for id in ["a", "b", "c"] {
        ok_json(&run(
            &config,
            &["register", "--attrs", &attrs(id, true, true, true), "--tier", "standard", "--id", id],
        ));
    }
    ok_json(&run(
        &config,
        &["tx", "--buyer", "a", "--seller", "b", "--cost", "50.00", "--scope", "general",
          "--promised", "5", "--actual", "5"],
    ));
    let before = std::fs::read(dir.path().join("repo").join("log.jsonl")).unwrap();

    let err = err_json(&run(
        &config,
        &["rate", "--rater", "c", "--ratee", "b", "--tx", "t1", "--value", "1.0"],
    ));
    assert_eq!(err["error"], "NotAParty");
    let err = err_json(&run(
        &config,
        &["rate", "--rater", "a", "--ratee", "b", "--tx", "t1", "--value", "1.5"],
    ));
    assert_eq!(err["error"], "ValueOutOfRange");
    let err = err_json(&run(
        &config,
        &["tx", "--buyer", "a", "--seller", "nobody", "--cost", "5.00", "--scope", "general",
          "--promised", "5", "--actual", "5"],
    ));
    assert_eq!(err["error"], "UnknownPrincipal");

    let after = std::fs::read(dir.path().join("repo").join("log.jsonl")).unwrap();
    assert_eq!(before, after, "rejected commands must not grow the log");

    // Self opinions and opinions about unverifiable subjects are refused.
    let err = err_json(&run(&config, &["opinion", "--viewer", "a", "--subject", "a"]));
    assert_eq!(err["error"], "SelfOpinion");
    ok_json(&run(
        &config,
        &["register", "--attrs", &attrs("z", false, false, false), "--tier", "standard", "--id", "z"],
    ));
    let err = err_json(&run(&config, &["opinion", "--viewer", "a", "--subject", "z"]));
    assert_eq!(err["error"], "BelowVerificationFloor");

    // Initializing on top of an existing repository is refused.
    let err = err_json(&run(&config, &["init"]));
    assert_eq!(err["error"], "AlreadyInitialized");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());

    // No config anywhere.
    let out = bin().args(["opinion", "--viewer", "a", "--subject", "b"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    // Config that is not JSON.
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "not json").unwrap();
    let out = bin()
        .arg("--config")
        .arg(&broken)
        .args(["opinion", "--viewer", "a", "--subject", "b"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unparseable --attrs payload.
    ok_json(&run(&config, &["init"]));
    let out = run(&config, &["register", "--attrs", "{{", "--tier", "standard"]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown subcommand is a clap parse failure.
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trust_config_env_var_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());

    let out = bin().env("TRUST_CONFIG", &config).arg("init").output().unwrap();
    let init = ok_json(&out);
    assert_eq!(init["version"], 0);
    let out = bin()
        .env("TRUST_CONFIG", &config)
        .args(["register", "--attrs", &attrs("env", true, true, true), "--tier", "standard"])
        .output()
        .unwrap();
    let registered = ok_json(&out);
    assert_eq!(registered["principal"], "p1");

    // The explicit flag wins over the environment.
    let other_dir = tempfile::tempdir().unwrap();
    let other = write_config(other_dir.path());
    let out = bin()
        .env("TRUST_CONFIG", &config)
        .arg("--config")
        .arg(&other)
        .arg("init")
        .output()
        .unwrap();
    let init = ok_json(&out);
    assert!(init["initialized"]
        .as_str()
        .unwrap()
        .starts_with(other_dir.path().to_str().unwrap()));
}

#[test]
fn replay_verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    ok_json(&run(&config, &["init"]));
    for id in ["a", "b"] {
        ok_json(&run(
            &config,
            &["register", "--attrs", &attrs(id, true, true, true), "--tier", "standard", "--id", id],
        ));
    }
    ok_json(&run(
        &config,
        &["tx", "--buyer", "a", "--seller", "b", "--cost", "9.99", "--scope", "general",
          "--promised", "3", "--actual", "3"],
    ));
    ok_json(&run(
        &config,
        &["rate", "--rater", "a", "--ratee", "b", "--tx", "t1", "--value", "1.0"],
    ));

    let repo_dir = dir.path().join("repo");
    let repo_arg = repo_dir.to_str().unwrap();
    let verify = ok_json(&run(&config, &["replay", "--repo", repo_arg, "--verify"]));
    assert_eq!(verify["verified"], true);
    assert_eq!(verify["events"], 4);

    // Tampered state export.
    let state_path = repo_dir.join("state.json");
    let pristine_state = std::fs::read(&state_path).unwrap();
    std::fs::write(&state_path, b"{}").unwrap();
    let err = err_json(&run(&config, &["replay", "--repo", repo_arg, "--verify"]));
    assert_eq!(err["error"], "VerifyFailed");
    std::fs::write(&state_path, &pristine_state).unwrap();

    // Tampered log: duplicate the last line so sequence numbers stop
    // increasing.
    let log_path = repo_dir.join("log.jsonl");
    let pristine_log = std::fs::read_to_string(&log_path).unwrap();
    let last = pristine_log.lines().last().unwrap().to_string();
    std::fs::write(&log_path, format!("{pristine_log}{last}\n")).unwrap();
    let err = err_json(&run(&config, &["replay", "--repo", repo_arg, "--verify"]));
    assert_eq!(err["error"], "CorruptLog");
    std::fs::write(&log_path, &pristine_log).unwrap();

    // Tampered log: a line that is not an event at all.
    std::fs::write(&log_path, format!("{pristine_log}not json\n")).unwrap();
    let err = err_json(&run(&config, &["replay", "--repo", repo_arg, "--verify"]));
    assert_eq!(err["error"], "CorruptLog");
    std::fs::write(&log_path, &pristine_log).unwrap();

    let verify = ok_json(&run(&config, &["replay", "--repo", repo_arg, "--verify"]));
    assert_eq!(verify["verified"], true);
}

fn small_scenario() -> ScenarioConfig {
    ScenarioConfig {
        seed: 7,
        ticks: 30,
        agents: vec![
            AgentProfile {
                name: "buyer".into(),
                role: Role::Buyer,
                count: 6,
                honesty: 1.0,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
            AgentProfile {
                name: "seller".into(),
                role: Role::Seller,
                count: 3,
                honesty: 0.9,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
        ],
        attack: Attack::None,
        engine: EngineParams::standard(),
        cost_min: "5.00".parse().unwrap(),
        cost_max: "500.00".parse().unwrap(),
        seller_selection: SellerSelection::Uniform,
    }
}

#[test]
fn simulate_and_compare_produce_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = dir.path().join("scenario.json");
    std::fs::write(&scenario_path, serde_json::to_string(&small_scenario()).unwrap()).unwrap();

    let out_dir = dir.path().join("outputs");
    let out = bin()
        .args(["simulate", "--scenario"])
        .arg(&scenario_path)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    let summary = ok_json(&out);
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["ticks"], 30);
    assert!(summary["final_per_class"]["seller"]["mean"].as_f64().is_some());
    for file in ["log.jsonl", "state.json", "metrics.json", "metrics.csv"] {
        assert!(out_dir.join(file).exists(), "missing artifact {file}");
    }
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("tick,class,mean,min,max\n"));

    // The simulation output is itself a valid repository for replay.
    let config = write_config(dir.path());
    let verify = ok_json(&run(
        &config,
        &["replay", "--repo", out_dir.to_str().unwrap(), "--verify"],
    ));
    assert_eq!(verify["verified"], true);

    // A/B comparison prints CSV on stdout.
    let variants_path = dir.path().join("variants.json");
    std::fs::write(
        &variants_path,
        serde_json::json!({
            "variants": [
                { "name": "baseline" },
                { "name": "no_credibility",
                  "integration": { "alpha": 0.2, "beta": 0.3, "gamma": 0.5,
                                   "min_verification": 0.2, "credibility_weighting": false } },
            ]
        })
        .to_string(),
    )
    .unwrap();
    let out = bin()
        .args(["compare", "--scenario"])
        .arg(&scenario_path)
        .arg("--variants")
        .arg(&variants_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("variant,class,mean,min,max"));
    assert!(csv.contains("baseline,seller"));
    assert!(csv.contains("no_credibility,seller"));

    // A scenario that fails validation is a usage error, not a crash.
    let empty = dir.path().join("empty.json");
    let mut broken = small_scenario();
    broken.agents.retain(|a| a.role == Role::Seller);
    std::fs::write(&empty, serde_json::to_string(&broken).unwrap()).unwrap();
    let out = bin()
        .args(["simulate", "--scenario"])
        .arg(&empty)
        .arg("--out-dir")
        .arg(dir.path().join("unused"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
