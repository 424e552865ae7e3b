//! Event-sourced repository of principals, transactions and ratings.
//!
//! Every write is an event appended to a log; all queryable state is derived
//! by folding that log from the start. Replaying the log therefore rebuilds
//! derived state byte for byte, which is what the audit tooling leans on.
//!
//! Two rules shape the data model:
//!
//! * Between an ordered pair of parties only the latest rating is kept. A new
//!   rating for the same pair overwrites the old one instead of accumulating,
//!   so trust cannot be farmed by repeating cheap transactions.
//! * Principals whose registrations carry the same identity fingerprint are
//!   folded into one reputation record. A discarded account that re-registers
//!   with the same strong credentials keeps its history.
//!
//! Validation happens before any mutation: a rejected event leaves both the
//! log and derived state untouched.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::Cost;

// ---------------------------------------------------------------------------
// identifiers

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrincipalId(String);

impl PrincipalId {
    pub fn new(id: impl Into<String>) -> Self {
        PrincipalId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PrincipalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PrincipalId {
    fn from(s: &str) -> Self {
        PrincipalId::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxId(String);

impl TxId {
    pub fn new(id: impl Into<String>) -> Self {
        TxId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TxId {
    fn from(s: &str) -> Self {
        TxId::new(s)
    }
}

/// Number of events applied so far. Two repositories at the same version
/// that started from the same log are in identical states.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RepositoryVersion(pub u64);

impl fmt::Display for RepositoryVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// ---------------------------------------------------------------------------
// events

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub tx_id: TxId,
    pub buyer: PrincipalId,
    pub seller: PrincipalId,
    pub cost: Cost,
    pub scope: String,
    pub promised_days: u32,
    pub actual_days: u32,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub rater: PrincipalId,
    pub ratee: PrincipalId,
    pub value: f64,
    pub tx_id: TxId,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    pub principal: PrincipalId,
    pub tier: String,
    pub verification_score: f64,
    pub verified_attrs: Vec<String>,
    pub fingerprint: Option<String>,
}

/// Re-verification of an existing principal's credentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredentialUpdate {
    pub principal: PrincipalId,
    pub verification_score: f64,
    pub verified_attrs: Vec<String>,
    pub fingerprint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventBody {
    Registered(Registration),
    CredentialVerified(CredentialUpdate),
    TransactionCompleted(TransactionRecord),
    RatingUpserted(Rating),
}

/// One log entry. `seq` starts at 1 and increases by exactly 1 per event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub tick: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepoError {
    #[error("principal `{0}` is not registered")]
    UnknownPrincipal(PrincipalId),
    #[error("transaction `{0}` does not exist")]
    UnknownTransaction(TxId),
    #[error("invariant violated: {rule}")]
    InvariantViolation { rule: String },
    #[error("corrupt log at seq {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
}

fn violation(rule: impl Into<String>) -> RepoError {
    RepoError::InvariantViolation { rule: rule.into() }
}

// ---------------------------------------------------------------------------
// derived state

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalRecord {
    pub tier: String,
    pub fingerprint: Option<String>,
    /// Root id of the identity group this account belongs to. Equals the
    /// account's own id unless a fingerprint linked it to an older account.
    pub canonical: PrincipalId,
}

/// Shared trust state of one identity group, keyed by canonical id.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ReputationRecord {
    pub verification_score: f64,
    pub verified_attrs: Vec<String>,
    /// Account ids folded into this record, in registration order.
    pub members: Vec<PrincipalId>,
}

#[derive(Debug, Clone, Default)]
pub struct Repository {
    log: Vec<Event>,
    principals: BTreeMap<PrincipalId, PrincipalRecord>,
    records: BTreeMap<PrincipalId, ReputationRecord>,
    transactions: BTreeMap<TxId, TransactionRecord>,
    /// canonical ratee -> canonical rater -> latest rating.
    ratings: BTreeMap<PrincipalId, BTreeMap<PrincipalId, Rating>>,
    /// fingerprint digest -> canonical id it is bound to.
    fingerprints: BTreeMap<String, PrincipalId>,
}

impl Repository {
    pub fn new() -> Self {
        Repository::default()
    }

    pub fn version(&self) -> RepositoryVersion {
        RepositoryVersion(self.log.len() as u64)
    }

    pub fn events(&self) -> &[Event] {
        &self.log
    }

    pub fn last_tick(&self) -> u64 {
        self.log.last().map(|e| e.tick).unwrap_or(0)
    }

    /// Validates and applies one event. On success the event is assigned the
    /// next sequence number and the new version is returned; on failure
    /// nothing changes.
    pub fn append(&mut self, tick: u64, body: EventBody) -> Result<RepositoryVersion, RepoError> {
        self.check(&body)?;
        let seq = self.log.len() as u64 + 1;
        self.apply(&body);
        self.log.push(Event { seq, tick, body });
        Ok(self.version())
    }

    /// Rebuilds a repository from a stored log. Sequence gaps, duplicates
    /// and events that would not have been accepted live are all reported
    /// as corruption.
    pub fn replay(events: Vec<Event>) -> Result<Repository, RepoError> {
        let mut repo = Repository::new();
        for event in events {
            let expected = repo.log.len() as u64 + 1;
            if event.seq != expected {
                return Err(RepoError::CorruptLog {
                    seq: event.seq,
                    reason: format!("expected seq {expected}"),
                });
            }
            repo.check(&event.body).map_err(|e| RepoError::CorruptLog {
                seq: event.seq,
                reason: e.to_string(),
            })?;
            repo.apply(&event.body);
            repo.log.push(event);
        }
        Ok(repo)
    }

    // -- validation -------------------------------------------------------

    fn check(&self, body: &EventBody) -> Result<(), RepoError> {
        match body {
            EventBody::Registered(r) => {
                if r.principal.as_str().is_empty() {
                    return Err(violation("principal id must be non-empty"));
                }
                if self.principals.contains_key(&r.principal) {
                    return Err(violation(format!(
                        "principal `{}` is already registered",
                        r.principal
                    )));
                }
                check_unit_interval(r.verification_score, "verification score")?;
                Ok(())
            }
            EventBody::CredentialVerified(u) => {
                let record = self
                    .principals
                    .get(&u.principal)
                    .ok_or_else(|| RepoError::UnknownPrincipal(u.principal.clone()))?;
                check_unit_interval(u.verification_score, "verification score")?;
                if let Some(fp) = &u.fingerprint {
                    match &record.fingerprint {
                        Some(current) if current != fp => {
                            return Err(violation(
                                "fingerprint is immutable once established",
                            ));
                        }
                        Some(_) => {}
                        None => {
                            if self.fingerprints.contains_key(fp) {
                                return Err(violation(
                                    "fingerprint is already bound to a different identity",
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
            EventBody::TransactionCompleted(tx) => {
                if tx.tx_id.as_str().is_empty() {
                    return Err(violation("transaction id must be non-empty"));
                }
                if self.transactions.contains_key(&tx.tx_id) {
                    return Err(violation(format!(
                        "transaction `{}` already exists",
                        tx.tx_id
                    )));
                }
                let buyer = self.canonical_of(&tx.buyer)?;
                let seller = self.canonical_of(&tx.seller)?;
                if buyer == seller {
                    return Err(violation("buyer and seller must be distinct identities"));
                }
                if tx.promised_days == 0 {
                    return Err(violation("promised_days must be at least 1"));
                }
                Ok(())
            }
            EventBody::RatingUpserted(r) => {
                let rater = self.canonical_of(&r.rater)?;
                let ratee = self.canonical_of(&r.ratee)?;
                if rater == ratee {
                    return Err(violation("rater and ratee must be distinct identities"));
                }
                check_unit_interval(r.value, "rating value")?;
                let tx = self
                    .transactions
                    .get(&r.tx_id)
                    .ok_or_else(|| RepoError::UnknownTransaction(r.tx_id.clone()))?;
                let buyer = self.canonical_of(&tx.buyer).expect("stored parties exist");
                let seller = self.canonical_of(&tx.seller).expect("stored parties exist");
                let parties_match = (rater == buyer && ratee == seller)
                    || (rater == seller && ratee == buyer);
                if !parties_match {
                    return Err(violation(
                        "rating must come from one party of its transaction about the other",
                    ));
                }
                Ok(())
            }
        }
    }

    // -- application (infallible after check) -----------------------------

    fn apply(&mut self, body: &EventBody) {
        match body {
            EventBody::Registered(r) => {
                // A known fingerprint adopts the existing root; canonical ids
                // never move after that, so apply order alone fixes them.
                let canonical = match &r.fingerprint {
                    Some(fp) => self
                        .fingerprints
                        .get(fp)
                        .cloned()
                        .unwrap_or_else(|| r.principal.clone()),
                    None => r.principal.clone(),
                };
                if let Some(fp) = &r.fingerprint {
                    self.fingerprints
                        .entry(fp.clone())
                        .or_insert_with(|| canonical.clone());
                }
                self.principals.insert(
                    r.principal.clone(),
                    PrincipalRecord {
                        tier: r.tier.clone(),
                        fingerprint: r.fingerprint.clone(),
                        canonical: canonical.clone(),
                    },
                );
                let record = self.records.entry(canonical).or_default();
                record.verification_score = r.verification_score;
                record.verified_attrs = r.verified_attrs.clone();
                record.members.push(r.principal.clone());
            }
            EventBody::CredentialVerified(u) => {
                let principal = self.principals.get_mut(&u.principal).expect("checked");
                if principal.fingerprint.is_none() {
                    if let Some(fp) = &u.fingerprint {
                        principal.fingerprint = Some(fp.clone());
                        self.fingerprints
                            .insert(fp.clone(), principal.canonical.clone());
                    }
                }
                let canonical = self.principals[&u.principal].canonical.clone();
                let record = self.records.get_mut(&canonical).expect("checked");
                record.verification_score = u.verification_score;
                record.verified_attrs = u.verified_attrs.clone();
            }
            EventBody::TransactionCompleted(tx) => {
                self.transactions.insert(tx.tx_id.clone(), tx.clone());
            }
            EventBody::RatingUpserted(r) => {
                let rater = self.canonical_of(&r.rater).expect("checked").clone();
                let ratee = self.canonical_of(&r.ratee).expect("checked").clone();
                self.ratings.entry(ratee).or_default().insert(rater, r.clone());
            }
        }
    }

    // -- queries ----------------------------------------------------------

    pub fn is_registered(&self, id: &PrincipalId) -> bool {
        self.principals.contains_key(id)
    }

    pub fn principal(&self, id: &PrincipalId) -> Option<&PrincipalRecord> {
        self.principals.get(id)
    }

    pub fn principal_count(&self) -> usize {
        self.principals.len()
    }

    pub fn canonical(&self, id: &PrincipalId) -> Option<&PrincipalId> {
        self.principals.get(id).map(|p| &p.canonical)
    }

    fn canonical_of(&self, id: &PrincipalId) -> Result<&PrincipalId, RepoError> {
        self.canonical(id)
            .ok_or_else(|| RepoError::UnknownPrincipal(id.clone()))
    }

    /// Reputation record of the identity group `id` belongs to.
    pub fn reputation_record(&self, id: &PrincipalId) -> Option<&ReputationRecord> {
        self.records.get(self.canonical(id)?)
    }

    pub fn verification_score(&self, id: &PrincipalId) -> Option<f64> {
        self.reputation_record(id).map(|r| r.verification_score)
    }

    pub fn transaction(&self, id: &TxId) -> Option<&TransactionRecord> {
        self.transactions.get(id)
    }

    pub fn transaction_count(&self) -> usize {
        self.transactions.len()
    }

    /// Latest rating from `rater` about `ratee`, across linked identities.
    pub fn latest_rating(&self, rater: &PrincipalId, ratee: &PrincipalId) -> Option<&Rating> {
        let rater = self.canonical(rater)?;
        let ratee = self.canonical(ratee)?;
        self.ratings.get(ratee)?.get(rater)
    }

    /// All latest ratings about `ratee`, in ascending canonical-rater order.
    pub fn ratings_about(&self, ratee: &PrincipalId) -> Vec<&Rating> {
        let Some(ratee) = self.canonical(ratee) else {
            return Vec::new();
        };
        self.ratings
            .get(ratee)
            .map(|m| m.values().collect())
            .unwrap_or_default()
    }

    /// Every stored rating as `(canonical rater, canonical ratee, rating)`.
    pub fn ratings(&self) -> impl Iterator<Item = (&PrincipalId, &PrincipalId, &Rating)> {
        self.ratings
            .iter()
            .flat_map(|(ratee, by_rater)| by_rater.iter().map(move |(rater, r)| (rater, ratee, r)))
    }

    pub fn rating_count(&self) -> usize {
        self.ratings.values().map(|m| m.len()).sum()
    }

    // -- export and log format --------------------------------------------

    /// Derived state as a JSON value whose maps are all key-sorted. Two
    /// repositories in the same state export identical bytes.
    pub fn export_state(&self) -> serde_json::Value {
        serde_json::json!({
            "version": self.version().0,
            "principals": &self.principals,
            "reputation_records": &self.records,
            "transactions": &self.transactions,
            "ratings": &self.ratings,
        })
    }

    pub fn export_state_canonical(&self) -> String {
        self.export_state().to_string()
    }

    /// Log as JSON lines, one event per line, in sequence order.
    pub fn events_to_jsonl(events: &[Event]) -> String {
        let mut out = String::new();
        for event in events {
            out.push_str(&serde_json::to_string(event).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn events_from_jsonl(text: &str) -> Result<Vec<Event>, RepoError> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(line).map_err(|e| RepoError::CorruptLog {
                seq: i as u64 + 1,
                reason: format!("line does not parse: {e}"),
            })?;
            events.push(event);
        }
        Ok(events)
    }
}

fn check_unit_interval(value: f64, what: &str) -> Result<(), RepoError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(violation(format!("{what} must lie in [0, 1], got {value}")))
    }
}
