//! Command-line surface.
//!
//! Every subcommand is a thin adapter over the library. Stdout carries
//! machine-readable output only (JSON, or CSV for `compare`); human-facing
//! diagnostics go to stderr. Domain failures exit 1 with a JSON error object
//! on stderr; configuration and usage problems exit 2.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::config::EngineConfig;
use crate::context::QueryContext;
use crate::engine::{ComputeMode, EngineError, TrustEngine};
use crate::policy::CredentialSet;
use crate::repo::{PrincipalId, Repository, TxId};
use crate::sim::{self, ScenarioConfig, SimError, VariantSpec};

#[derive(Debug, Parser)]
#[command(name = "trustmarket", version, about = "Policy and reputation trust engine")]
pub struct Cli {
    /// Engine config file; falls back to the TRUST_CONFIG environment
    /// variable.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty repository.
    Init {
        /// Repository directory; defaults to the config's `repository`.
        #[arg(long, value_name = "DIR")]
        repo: Option<PathBuf>,
    },
    /// Register a principal with disclosed credentials.
    Register {
        /// Credentials as JSON: {"email": {"value": "...", "verified": true}, ...}
        #[arg(long, value_name = "JSON")]
        attrs: String,
        #[arg(long)]
        tier: String,
        /// Explicit principal id; auto-assigned when omitted.
        #[arg(long)]
        id: Option<String>,
    },
    /// Record a completed transaction.
    Tx {
        #[arg(long)]
        buyer: String,
        #[arg(long)]
        seller: String,
        /// Decimal amount, e.g. 123.45
        #[arg(long)]
        cost: String,
        #[arg(long)]
        scope: String,
        /// Promised delivery time in days.
        #[arg(long)]
        promised: u32,
        /// Actual delivery time in days.
        #[arg(long)]
        actual: u32,
    },
    /// Store or overwrite a cross rating bound to a transaction.
    Rate {
        #[arg(long)]
        rater: String,
        #[arg(long)]
        ratee: String,
        #[arg(long)]
        tx: String,
        /// Rating in [0, 1].
        #[arg(long)]
        value: f64,
    },
    /// Compute a trust opinion.
    Opinion {
        #[arg(long)]
        viewer: String,
        #[arg(long)]
        subject: String,
        /// Restrict recommendations to one product scope.
        #[arg(long)]
        scope: Option<String>,
        /// atc (cached) or dtc (always fresh).
        #[arg(long, default_value = "atc")]
        mode: ComputeMode,
    },
    /// Run a scenario and write log, state and metrics files.
    Simulate {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        #[arg(long, value_name = "DIR", default_value = "sim-out")]
        out_dir: PathBuf,
    },
    /// Evaluate one scripted scenario under several parameter variants.
    Compare {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        /// JSON file: {"variants": [{"name": "...", ...overrides}]}
        #[arg(long, value_name = "FILE")]
        variants: PathBuf,
    },
    /// Rebuild state from the log; with --verify, check it against the
    /// stored state export.
    Replay {
        #[arg(long, value_name = "DIR")]
        repo: PathBuf,
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, PartialEq)]
pub enum CliError {
    /// A rule of the trust model rejected the request. Exit code 1.
    Domain { name: String, message: String },
    /// Bad invocation or configuration. Exit code 2.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain { .. } => 1,
            CliError::Usage(_) => 2,
        }
    }

    /// What to print on stderr. Domain errors are a JSON object so scripts
    /// can pattern-match on the error name.
    pub fn to_stderr(&self) -> String {
        match self {
            CliError::Domain { name, message } => {
                crate::canonical_json(&json!({ "error": name, "message": message }))
            }
            CliError::Usage(message) => format!("error: {message}"),
        }
    }
}

fn domain(e: EngineError) -> CliError {
    CliError::Domain { name: e.name().to_string(), message: e.to_string() }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Domain { name: "Io".into(), message: e.to_string() }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Engine(inner) => domain(inner),
        other => CliError::Usage(other.to_string()),
    }
}

/// Runs one parsed invocation and returns the stdout payload.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Init { repo } => cmd_init(cli.config, repo),
        Command::Register { attrs, tier, id } => cmd_register(cli.config, &attrs, &tier, id),
        Command::Tx { buyer, seller, cost, scope, promised, actual } => {
            cmd_tx(cli.config, &buyer, &seller, &cost, &scope, promised, actual)
        }
        Command::Rate { rater, ratee, tx, value } => {
            cmd_rate(cli.config, &rater, &ratee, &tx, value)
        }
        Command::Opinion { viewer, subject, scope, mode } => {
            cmd_opinion(cli.config, &viewer, &subject, scope, mode)
        }
        Command::Simulate { scenario, out_dir } => cmd_simulate(&scenario, &out_dir),
        Command::Compare { scenario, variants } => cmd_compare(&scenario, &variants),
        Command::Replay { repo, verify } => cmd_replay(&repo, verify),
    }
}

// ---------------------------------------------------------------------------
// plumbing

fn load_config(flag: Option<PathBuf>) -> Result<EngineConfig, CliError> {
    let path = flag
        .or_else(|| std::env::var_os("TRUST_CONFIG").map(PathBuf::from))
        .ok_or_else(|| {
            CliError::Usage("no config given: pass --config FILE or set TRUST_CONFIG".into())
        })?;
    EngineConfig::load(&path).map_err(|e| CliError::Usage(e.to_string()))
}

fn log_path(dir: &Path) -> PathBuf {
    dir.join("log.jsonl")
}

fn state_path(dir: &Path) -> PathBuf {
    dir.join("state.json")
}

fn open_repo(dir: &Path) -> Result<Repository, CliError> {
    let text = std::fs::read_to_string(log_path(dir)).map_err(io_error)?;
    let events = Repository::events_from_jsonl(&text)
        .map_err(|e| domain(EngineError::from(e)))?;
    Repository::replay(events).map_err(|e| domain(EngineError::from(e)))
}

/// Appends the events added since `known` to the log and rewrites the state
/// export.
fn persist(dir: &Path, repo: &Repository, known: usize) -> Result<(), CliError> {
    use std::io::Write as _;
    let added = Repository::events_to_jsonl(&repo.events()[known..]);
    let mut file = std::fs::OpenOptions::new()
        .append(true)
        .open(log_path(dir))
        .map_err(io_error)?;
    file.write_all(added.as_bytes()).map_err(io_error)?;
    std::fs::write(state_path(dir), repo.export_state_canonical()).map_err(io_error)?;
    Ok(())
}

/// Opens the configured repository, applies `op` at the next tick, persists
/// the new events and renders the outcome as canonical JSON.
fn mutate<T: serde::Serialize>(
    config_flag: Option<PathBuf>,
    op: impl FnOnce(&mut TrustEngine) -> Result<T, EngineError>,
) -> Result<String, CliError> {
    let config = load_config(config_flag)?;
    let repo = open_repo(&config.repository)?;
    let known = repo.events().len();
    let mut engine = TrustEngine::from_parts(repo, config.params.clone())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    engine.set_tick(engine.repo().last_tick() + 1);
    let outcome = op(&mut engine).map_err(domain)?;
    persist(&config.repository, engine.repo(), known)?;
    Ok(crate::canonical_json(&outcome))
}

// ---------------------------------------------------------------------------
// commands

fn cmd_init(config_flag: Option<PathBuf>, repo: Option<PathBuf>) -> Result<String, CliError> {
    let dir = match repo {
        Some(dir) => dir,
        None => load_config(config_flag)?.repository,
    };
    if log_path(&dir).exists() {
        return Err(CliError::Domain {
            name: "AlreadyInitialized".into(),
            message: format!("{} already contains a repository log", dir.display()),
        });
    }
    std::fs::create_dir_all(&dir).map_err(io_error)?;
    std::fs::write(log_path(&dir), "").map_err(io_error)?;
    let empty = Repository::new();
    std::fs::write(state_path(&dir), empty.export_state_canonical()).map_err(io_error)?;
    Ok(crate::canonical_json(&json!({
        "initialized": dir.display().to_string(),
        "version": 0,
    })))
}

fn cmd_register(
    config_flag: Option<PathBuf>,
    attrs: &str,
    tier: &str,
    id: Option<String>,
) -> Result<String, CliError> {
    let creds: CredentialSet = serde_json::from_str(attrs)
        .map_err(|e| CliError::Usage(format!("cannot parse --attrs: {e}")))?;
    mutate(config_flag, |engine| match id {
        Some(id) => engine.register_as(id.as_str(), tier, &creds),
        None => engine.register(tier, &creds),
    })
}

fn cmd_tx(
    config_flag: Option<PathBuf>,
    buyer: &str,
    seller: &str,
    cost: &str,
    scope: &str,
    promised: u32,
    actual: u32,
) -> Result<String, CliError> {
    let cost: crate::cost::Cost = cost
        .parse()
        .map_err(|e: crate::cost::ParseCostError| CliError::Usage(e.to_string()))?;
    mutate(config_flag, |engine| {
        engine.record_transaction(
            &PrincipalId::new(buyer),
            &PrincipalId::new(seller),
            cost,
            scope,
            promised,
            actual,
        )
    })
}

fn cmd_rate(
    config_flag: Option<PathBuf>,
    rater: &str,
    ratee: &str,
    tx: &str,
    value: f64,
) -> Result<String, CliError> {
    mutate(config_flag, |engine| {
        let version = engine.rate_after_transaction(
            &PrincipalId::new(rater),
            &PrincipalId::new(ratee),
            &TxId::new(tx),
            value,
        )?;
        Ok(json!({ "version": version }))
    })
}

fn cmd_opinion(
    config_flag: Option<PathBuf>,
    viewer: &str,
    subject: &str,
    scope: Option<String>,
    mode: ComputeMode,
) -> Result<String, CliError> {
    let config = load_config(config_flag)?;
    let repo = open_repo(&config.repository)?;
    let engine = TrustEngine::from_parts(repo, config.params)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let query = QueryContext { scope };
    let opinion = engine
        .opinion(&PrincipalId::new(viewer), &PrincipalId::new(subject), &query, mode)
        .map_err(domain)?;
    Ok(crate::canonical_json(&opinion))
}

fn cmd_simulate(scenario: &Path, out_dir: &Path) -> Result<String, CliError> {
    let config = ScenarioConfig::load(scenario).map_err(sim_error)?;
    let (script, metrics) = sim::run_scenario(&config).map_err(sim_error)?;
    sim::write_outputs(out_dir, &script, &metrics).map_err(io_error)?;
    Ok(crate::canonical_json(&json!({
        "out_dir": out_dir.display().to_string(),
        "seed": metrics.seed,
        "ticks": metrics.ticks,
        "events": script.events.len(),
        "final_per_class": metrics.final_per_class,
        "separation": metrics.separation,
        "guard_rejections": metrics.guard_rejections,
    })))
}

#[derive(Debug, Deserialize)]
struct VariantsFile {
    variants: Vec<VariantSpec>,
}

fn cmd_compare(scenario: &Path, variants: &Path) -> Result<String, CliError> {
    let config = ScenarioConfig::load(scenario).map_err(sim_error)?;
    let text = std::fs::read_to_string(variants).map_err(io_error)?;
    let file: VariantsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse variants file: {e}")))?;
    let comparison = sim::compare_runs(&config, &file.variants).map_err(sim_error)?;
    Ok(comparison.to_csv())
}

fn cmd_replay(dir: &Path, verify: bool) -> Result<String, CliError> {
    let repo = open_repo(dir)?;
    if verify {
        let stored = std::fs::read_to_string(state_path(dir)).map_err(io_error)?;
        let replayed = repo.export_state_canonical();
        if stored != replayed {
            return Err(CliError::Domain {
                name: "VerifyFailed".into(),
                message: "stored state export does not match the replayed log".into(),
            });
        }
        Ok(crate::canonical_json(&json!({
            "verified": true,
            "events": repo.version().0,
        })))
    } else {
        Ok(crate::canonical_json(&json!({
            "events": repo.version().0,
            "version": repo.version().0,
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_an_opinion_invocation() {
        let cli = Cli::try_parse_from([
            "trustmarket",
            "--config",
            "market.json",
            "opinion",
            "--viewer",
            "alice",
            "--subject",
            "bob",
            "--mode",
            "dtc",
        ])
        .unwrap();
        assert_eq!(cli.config, Some(PathBuf::from("market.json")));
        match cli.command {
            Command::Opinion { viewer, subject, scope, mode } => {
                assert_eq!(viewer, "alice");
                assert_eq!(subject, "bob");
                assert_eq!(scope, None);
                assert_eq!(mode, ComputeMode::Dtc);
            }
            other => panic!("parsed into {other:?}"),
        }
    }

    #[test]
    fn mode_defaults_to_atc_and_rejects_junk() {
        let cli = Cli::try_parse_from([
            "trustmarket", "opinion", "--viewer", "a", "--subject", "b",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::Opinion { mode: ComputeMode::Atc, .. }
        ));
        assert!(Cli::try_parse_from([
            "trustmarket", "opinion", "--viewer", "a", "--subject", "b", "--mode", "warp",
        ])
        .is_err());
    }

    #[test]
    fn missing_config_is_a_usage_error() {
        // Scoped to a flag value, not the environment, so this cannot race
        // with other tests: no TRUST_CONFIG is set in the test environment.
        let err = cmd_register(None, "{}", "standard", None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn domain_errors_render_as_json_with_a_name() {
        let err = CliError::Domain { name: "NotAParty".into(), message: "nope".into() };
        assert_eq!(err.exit_code(), 1);
        let rendered = err.to_stderr();
        let value: serde_json::Value = serde_json::from_str(&rendered).unwrap();
        assert_eq!(value["error"], "NotAParty");
        assert_eq!(value["message"], "nope");
    }
}
