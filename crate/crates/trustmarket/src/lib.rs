//! Trust for buyer/seller marketplaces, built from two halves that cover for
//! each other: policy-based verification of who someone is, and
//! reputation-based evidence of how they have behaved.
//!
//! Verification alone is a binary gate that tells newcomers apart from
//! frauds exactly once, at the door. Ratings alone are a popularity contest
//! that colluding accounts can farm and discarded accounts can escape. This
//! crate wires the two together:
//!
//! * registration grades disclosed credentials into a score instead of a
//!   yes/no, and refuses to ask for more than the tier policy allows;
//! * strong credentials produce an identity fingerprint, so re-registering
//!   with the same passport lands on the same reputation record;
//! * every rating is tied to a real transaction between its two parties and
//!   only the latest rating per ordered pair is kept;
//! * recommendations weight each rater by credibility and each transaction
//!   by context (cost, scope, delivery), then blend with verification and
//!   the viewer's own experience into one score.
//!
//! Everything is event-sourced: state is a fold over an append-only log, and
//! replaying the log reproduces it byte for byte.
//!
//! # Where to start
//!
//! The `examples/` directory is the front door; each file is a runnable
//! walkthrough of one capability:
//!
//! * `registration` - tier policies, graded verification, minimal disclosure
//! * `cold_start` - opinions about a subject nobody has rated yet
//! * `marketplace_basics` - transactions, cross ratings, opinion anatomy
//! * `context_weighting` - cost, scope and delivery shaping recommendations
//! * `atc_vs_dtc` - cached versus always-fresh opinion computation
//! * `rebirth_whitewash` - fingerprints defeating account re-creation
//! * `collusion_ring` - credibility weighting versus mutual-praise rings
//! * `slander_campaign` - transaction-bound ratings versus smear attacks
//! * `context_exploit` - cost weighting versus cheap-sale reputation farming
//! * `baseline_market` - the deterministic simulator end to end
//! * `replay_audit` - log replay and state verification
//!
//! Run one with `cargo run --example <name>`.
//!
//! A thin `trustmarket` binary exposes the same operations for shell use;
//! see the repository README.
//!
//! # Quick taste
//!
//! ```
//! use trustmarket::{
//!     ComputeMode, EngineParams, QueryContext, TrustEngine, credential_set,
//! };
//!
//! let mut engine = TrustEngine::new(EngineParams::standard())?;
//! let alice = engine
//!     .register("standard", &credential_set([
//!         ("email", "alice@example.com", true),
//!         ("payment", "visa-4242", true),
//!         ("gov_id", "P-111", true),
//!     ]))?
//!     .principal;
//! let bob = engine
//!     .register("standard", &credential_set([
//!         ("email", "bob@example.com", true),
//!         ("payment", "mc-5151", true),
//!         ("gov_id", "P-222", true),
//!     ]))?
//!     .principal;
//!
//! let tx = engine.record_transaction(&alice, &bob, "120.00".parse()?, "books", 5, 4)?;
//! engine.rate_after_transaction(&alice, &bob, &tx.tx_id, 0.9)?;
//!
//! let opinion = engine.opinion(&alice, &bob, &QueryContext::any(), ComputeMode::Dtc)?;
//! assert!(opinion.score > 0.9);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod config;
pub mod context;
pub mod cost;
pub mod engine;
pub mod opinion;
pub mod policy;
pub mod repo;
pub mod reputation;
pub mod sim;

pub use config::{CacheSettings, ConfigError, EngineConfig, EngineParams};
pub use context::{ContextWeights, QueryContext};
pub use cost::Cost;
pub use engine::{
    ComputeMode, EngineError, RegistrationOutcome, TransactionOutcome, TrustEngine,
};
pub use opinion::{Component, IntegrationParams, OpinionError, TrustOpinion};
pub use policy::{
    credential_set, Credential, CredentialSet, PolicyError, RequiredAttr, TierPolicy,
    VerificationResult,
};
pub use repo::{
    Event, EventBody, PrincipalId, Rating, RepoError, Repository, RepositoryVersion,
    TransactionRecord, TxId,
};
pub use reputation::{AtcCache, TrustComponent};
pub use sim::{
    AgentProfile, Attack, Comparison, MetricsReport, ScenarioConfig, SimError, SimScript,
    VariantSpec,
};

/// JSON with all object keys sorted, rendered compactly. The one canonical
/// form used for state exports, digests and CLI output, so byte equality
/// means semantic equality.
pub fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .expect("value serializes to JSON")
        .to_string()
}
