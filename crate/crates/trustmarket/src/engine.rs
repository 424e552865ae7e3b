//! High-level facade wiring the repository, policy layer and reputation
//! machinery together behind one API.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, EngineParams};
use crate::context::QueryContext;
use crate::cost::Cost;
use crate::opinion::{OpinionError, TrustOpinion};
use crate::policy::{self, CredentialSet, PolicyError, VerificationResult};
use crate::repo::{
    EventBody, PrincipalId, Rating, Registration, RepoError, Repository, RepositoryVersion,
    TransactionRecord, TxId,
};
use crate::reputation::{atc_opinion, dtc_opinion, AtcCache};

/// Opinion computation mode: `Atc` may answer from cache, `Dtc` always
/// recomputes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComputeMode {
    Atc,
    Dtc,
}

impl FromStr for ComputeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "atc" => Ok(ComputeMode::Atc),
            "dtc" => Ok(ComputeMode::Dtc),
            other => Err(format!("unknown mode `{other}`, expected `atc` or `dtc`")),
        }
    }
}

impl fmt::Display for ComputeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComputeMode::Atc => "atc",
            ComputeMode::Dtc => "dtc",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Opinion(#[from] OpinionError),
    #[error("unknown tier `{0}`")]
    UnknownTier(String),
    #[error("`{rater}` and `{ratee}` are not the two parties of transaction `{tx_id}`")]
    NotAParty {
        rater: PrincipalId,
        ratee: PrincipalId,
        tx_id: TxId,
    },
    #[error("rating value {0} must lie in [0, 1]")]
    ValueOutOfRange(f64),
}

impl EngineError {
    /// Stable machine-readable name of the leaf error, independent of how it
    /// was wrapped on the way up.
    pub fn name(&self) -> &'static str {
        fn repo_name(e: &RepoError) -> &'static str {
            match e {
                RepoError::UnknownPrincipal(_) => "UnknownPrincipal",
                RepoError::UnknownTransaction(_) => "UnknownTransaction",
                RepoError::InvariantViolation { .. } => "InvariantViolation",
                RepoError::CorruptLog { .. } => "CorruptLog",
            }
        }
        match self {
            EngineError::Repo(e) => repo_name(e),
            EngineError::Policy(PolicyError::DisclosureViolation(_)) => "DisclosureViolation",
            EngineError::Policy(PolicyError::InvalidPolicy(_)) => "InvalidPolicy",
            EngineError::Opinion(OpinionError::Repo(e)) => repo_name(e),
            EngineError::Opinion(OpinionError::SelfOpinion) => "SelfOpinion",
            EngineError::Opinion(OpinionError::BelowVerificationFloor { .. }) => {
                "BelowVerificationFloor"
            }
            EngineError::UnknownTier(_) => "UnknownTier",
            EngineError::NotAParty { .. } => "NotAParty",
            EngineError::ValueOutOfRange(_) => "ValueOutOfRange",
        }
    }
}

/// What a registration produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationOutcome {
    pub principal: PrincipalId,
    pub verification: VerificationResult,
    /// Set when the identity fingerprint matched an existing account; the
    /// new principal shares that account's reputation record.
    pub linked_to: Option<PrincipalId>,
    pub version: RepositoryVersion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransactionOutcome {
    pub tx_id: TxId,
    pub version: RepositoryVersion,
}

/// The engine owns the repository, the engine parameters and the ATC cache,
/// and stamps every write with the current logical tick.
#[derive(Debug)]
pub struct TrustEngine {
    repo: Repository,
    params: EngineParams,
    params_digest: String,
    cache: AtcCache,
    tick: u64,
}

impl TrustEngine {
    pub fn new(params: EngineParams) -> Result<Self, ConfigError> {
        TrustEngine::from_parts(Repository::new(), params)
    }

    pub fn from_parts(repo: Repository, params: EngineParams) -> Result<Self, ConfigError> {
        params.validate()?;
        let params_digest = params.digest();
        Ok(TrustEngine {
            tick: repo.last_tick(),
            repo,
            params,
            params_digest,
            cache: AtcCache::new(),
        })
    }

    pub fn repo(&self) -> &Repository {
        &self.repo
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn params_digest(&self) -> &str {
        &self.params_digest
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Sets the logical time stamped onto subsequent events.
    pub fn set_tick(&mut self, tick: u64) {
        self.tick = tick;
    }

    pub fn flush_cache(&self) {
        self.cache.flush();
    }

    /// Registers a principal under an auto-assigned id (`p1`, `p2`, ...).
    pub fn register(
        &mut self,
        tier: &str,
        creds: &CredentialSet,
    ) -> Result<RegistrationOutcome, EngineError> {
        let id = self.fresh_principal_id();
        self.register_as(id, tier, creds)
    }

    /// Registers a principal under a caller-chosen id.
    ///
    /// The disclosure request (the set of attribute names in `creds`) is
    /// checked against the tier policy before anything is verified or
    /// stored; asking for too much fails the registration outright.
    pub fn register_as(
        &mut self,
        id: impl Into<PrincipalId>,
        tier: &str,
        creds: &CredentialSet,
    ) -> Result<RegistrationOutcome, EngineError> {
        let id = id.into();
        let policy = self
            .params
            .tier(tier)
            .ok_or_else(|| EngineError::UnknownTier(tier.to_string()))?;
        policy::validate_disclosure_request(creds.keys().map(String::as_str), policy)?;
        let verification = policy::verify_credentials(creds, policy);
        let version = self.repo.append(
            self.tick,
            EventBody::Registered(Registration {
                principal: id.clone(),
                tier: tier.to_string(),
                verification_score: verification.score,
                verified_attrs: verification.verified_attrs.clone(),
                fingerprint: verification.fingerprint.clone(),
            }),
        )?;
        let root = self.repo.canonical(&id).expect("just registered").clone();
        let linked_to = (root != id).then_some(root);
        Ok(RegistrationOutcome {
            principal: id,
            verification,
            linked_to,
            version,
        })
    }

    /// Re-runs credential verification for an existing principal with a new
    /// credential set and records the outcome.
    pub fn verify_credentials(
        &mut self,
        id: &PrincipalId,
        creds: &CredentialSet,
    ) -> Result<VerificationResult, EngineError> {
        let record = self
            .repo
            .principal(id)
            .ok_or_else(|| RepoError::UnknownPrincipal(id.clone()))?;
        let policy = self
            .params
            .tier(&record.tier)
            .ok_or_else(|| EngineError::UnknownTier(record.tier.clone()))?;
        policy::validate_disclosure_request(creds.keys().map(String::as_str), policy)?;
        let verification = policy::verify_credentials(creds, policy);
        self.repo.append(
            self.tick,
            EventBody::CredentialVerified(crate::repo::CredentialUpdate {
                principal: id.clone(),
                verification_score: verification.score,
                verified_attrs: verification.verified_attrs.clone(),
                fingerprint: verification.fingerprint.clone(),
            }),
        )?;
        Ok(verification)
    }

    /// Records a completed transaction under an auto-assigned id (`t1`, ...).
    pub fn record_transaction(
        &mut self,
        buyer: &PrincipalId,
        seller: &PrincipalId,
        cost: Cost,
        scope: &str,
        promised_days: u32,
        actual_days: u32,
    ) -> Result<TransactionOutcome, EngineError> {
        let tx_id = self.fresh_tx_id();
        let version = self.repo.append(
            self.tick,
            EventBody::TransactionCompleted(TransactionRecord {
                tx_id: tx_id.clone(),
                buyer: buyer.clone(),
                seller: seller.clone(),
                cost,
                scope: scope.to_string(),
                promised_days,
                actual_days,
                tick: self.tick,
            }),
        )?;
        Ok(TransactionOutcome { tx_id, version })
    }

    /// Stores (or overwrites) a cross rating bound to a transaction the
    /// rater took part in.
    pub fn rate_after_transaction(
        &mut self,
        rater: &PrincipalId,
        ratee: &PrincipalId,
        tx_id: &TxId,
        value: f64,
    ) -> Result<RepositoryVersion, EngineError> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(EngineError::ValueOutOfRange(value));
        }
        let tx = self
            .repo
            .transaction(tx_id)
            .ok_or_else(|| RepoError::UnknownTransaction(tx_id.clone()))?;
        let resolve = |id: &PrincipalId| {
            self.repo
                .canonical(id)
                .cloned()
                .ok_or_else(|| RepoError::UnknownPrincipal(id.clone()))
        };
        let (rater_root, ratee_root) = (resolve(rater)?, resolve(ratee)?);
        let buyer_root = resolve(&tx.buyer).expect("stored parties exist");
        let seller_root = resolve(&tx.seller).expect("stored parties exist");
        let parties_match = (rater_root == buyer_root && ratee_root == seller_root)
            || (rater_root == seller_root && ratee_root == buyer_root);
        if !parties_match {
            return Err(EngineError::NotAParty {
                rater: rater.clone(),
                ratee: ratee.clone(),
                tx_id: tx_id.clone(),
            });
        }
        Ok(self.repo.append(
            self.tick,
            EventBody::RatingUpserted(Rating {
                rater: rater.clone(),
                ratee: ratee.clone(),
                value,
                tx_id: tx_id.clone(),
                tick: self.tick,
            }),
        )?)
    }

    /// Trust opinion of `viewer` about `subject`.
    pub fn opinion(
        &self,
        viewer: &PrincipalId,
        subject: &PrincipalId,
        query: &QueryContext,
        mode: ComputeMode,
    ) -> Result<TrustOpinion, EngineError> {
        let opinion = match mode {
            ComputeMode::Dtc => dtc_opinion(
                &self.repo,
                viewer,
                subject,
                query,
                &self.params.integration,
                &self.params.context,
            ),
            ComputeMode::Atc => atc_opinion(
                &self.repo,
                &self.cache,
                viewer,
                subject,
                query,
                &self.params.integration,
                &self.params.context,
                self.params.cache.staleness_events,
                &self.params_digest,
            ),
        };
        Ok(opinion?)
    }

    fn fresh_principal_id(&self) -> PrincipalId {
        let mut n = self.repo.principal_count() + 1;
        loop {
            let candidate = PrincipalId::new(format!("p{n}"));
            if !self.repo.is_registered(&candidate) {
                return candidate;
            }
            n += 1;
        }
    }

    fn fresh_tx_id(&self) -> TxId {
        let mut n = self.repo.transaction_count() + 1;
        loop {
            let candidate = TxId::new(format!("t{n}"));
            if self.repo.transaction(&candidate).is_none() {
                return candidate;
            }
            n += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::credential_set;

    fn full_creds() -> CredentialSet {
        credential_set([
            ("email", "a@example.com", true),
            ("payment", "visa-1111", true),
            ("gov_id", "id-alice", true),
        ])
    }

    fn engine_with(n: usize) -> (TrustEngine, Vec<PrincipalId>) {
        let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
        let ids: Vec<PrincipalId> = (0..n)
            .map(|i| {
                let creds = credential_set([
                    ("email", "e", true),
                    ("payment", "p", true),
                    ("gov_id", &format!("id-{i}")[..], true),
                ]);
                engine.register("standard", &creds).unwrap().principal
            })
            .collect();
        (engine, ids)
    }

    #[test]
    fn register_assigns_sequential_ids_and_scores() {
        let (engine, ids) = engine_with(3);
        assert_eq!(ids[0].as_str(), "p1");
        assert_eq!(ids[2].as_str(), "p3");
        assert_eq!(engine.repo().verification_score(&ids[1]), Some(1.0));
    }

    #[test]
    fn register_rejects_overreaching_disclosure() {
        let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
        let mut creds = full_creds();
        creds.insert(
            "mothers_maiden_name".into(),
            crate::policy::Credential { value: "x".into(), verified: true },
        );
        let err = engine.register("standard", &creds).unwrap_err();
        assert_eq!(err.name(), "DisclosureViolation");
        assert_eq!(engine.repo().principal_count(), 0);
    }

    #[test]
    fn register_links_matching_fingerprints() {
        let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
        let first = engine.register_as("old", "standard", &full_creds()).unwrap();
        assert_eq!(first.linked_to, None);
        let second = engine.register_as("new", "standard", &full_creds()).unwrap();
        assert_eq!(second.linked_to, Some(PrincipalId::new("old")));
        // Different gov_id: a genuinely fresh identity.
        let other = credential_set([
            ("email", "a@example.com", true),
            ("payment", "visa-1111", true),
            ("gov_id", "id-someone-else", true),
        ]);
        let third = engine.register_as("fresh", "standard", &other).unwrap();
        assert_eq!(third.linked_to, None);
    }

    #[test]
    fn rating_requires_party_membership_and_valid_value() {
        let (mut engine, ids) = engine_with(3);
        let tx = engine
            .record_transaction(&ids[0], &ids[1], "10.00".parse().unwrap(), "general", 5, 5)
            .unwrap();
        let err = engine
            .rate_after_transaction(&ids[2], &ids[1], &tx.tx_id, 0.5)
            .unwrap_err();
        assert_eq!(err.name(), "NotAParty");
        let err = engine
            .rate_after_transaction(&ids[0], &ids[1], &tx.tx_id, 1.5)
            .unwrap_err();
        assert_eq!(err.name(), "ValueOutOfRange");
        engine
            .rate_after_transaction(&ids[0], &ids[1], &tx.tx_id, 1.0)
            .unwrap();
        engine
            .rate_after_transaction(&ids[1], &ids[0], &tx.tx_id, 0.8)
            .unwrap();
        assert_eq!(engine.repo().rating_count(), 2);
    }

    #[test]
    fn opinion_modes_agree_with_zero_staleness() {
        let (mut engine, ids) = engine_with(4);
        engine.set_tick(1);
        for i in 1..3 {
            let tx = engine
                .record_transaction(&ids[i], &ids[3], "50.00".parse().unwrap(), "general", 5, 6)
                .unwrap();
            engine
                .rate_after_transaction(&ids[i], &ids[3], &tx.tx_id, 0.9)
                .unwrap();
        }
        let atc = engine
            .opinion(&ids[0], &ids[3], &QueryContext::any(), ComputeMode::Atc)
            .unwrap();
        let dtc = engine
            .opinion(&ids[0], &ids[3], &QueryContext::any(), ComputeMode::Dtc)
            .unwrap();
        assert_eq!(atc, dtc);
    }

    #[test]
    fn cold_start_opinion_equals_verification_score() {
        let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
        let viewer = engine.register("standard", &full_creds()).unwrap().principal;
        // Only email and payment verify: score 0.5.
        let partial = credential_set([
            ("email", "b@example.com", true),
            ("payment", "mc-2222", true),
            ("gov_id", "id-bob", false),
        ]);
        let outcome = engine.register("standard", &partial).unwrap();
        let opinion = engine
            .opinion(&viewer, &outcome.principal, &QueryContext::any(), ComputeMode::Dtc)
            .unwrap();
        assert!(opinion.score == outcome.verification.score, "bitwise equality expected");
        assert_eq!(opinion.components_used, vec![crate::opinion::Component::Verification]);
    }

    #[test]
    fn verify_credentials_updates_the_floor_gate() {
        let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
        let viewer = engine.register("standard", &full_creds()).unwrap().principal;
        let weak = credential_set([("email", "c@example.com", false)]);
        let subject = engine.register("standard", &weak).unwrap().principal;
        let err = engine
            .opinion(&viewer, &subject, &QueryContext::any(), ComputeMode::Dtc)
            .unwrap_err();
        assert_eq!(err.name(), "BelowVerificationFloor");
        let upgraded = credential_set([("email", "c@example.com", true), ("payment", "v", true)]);
        engine.verify_credentials(&subject, &upgraded).unwrap();
        let opinion = engine
            .opinion(&viewer, &subject, &QueryContext::any(), ComputeMode::Dtc)
            .unwrap();
        assert_eq!(opinion.score, 0.5);
    }

    #[test]
    fn unknown_tier_is_reported_before_any_write() {
        let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
        let err = engine.register("gold", &full_creds()).unwrap_err();
        assert_eq!(err.name(), "UnknownTier");
        assert_eq!(engine.repo().version().0, 0);
    }
}
