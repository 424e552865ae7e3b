//! Reputation aggregation: direct trust, rater credibility, recommended
//! trust, and the two opinion computation modes.
//!
//! DTC (dynamic trust computation) walks the repository fresh on every call.
//! ATC (actual, cached trust computation) answers from a cache as long as the
//! cached entry is no more than `staleness_events` repository versions old;
//! with the default bound of 0 it returns cached values only when nothing has
//! changed at all, so ATC and DTC are observably identical there.
//!
//! Recommended trust is where the attack resistance lives. Each rater's
//! latest rating about the subject is weighted by two factors: the context
//! weight of the transaction behind it (cheap throwaway deals count less)
//! and the rater's credibility in the viewer's eyes (a rater everyone calls
//! a fraud counts less). Both factors are in [0, 1] and multiply.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::context::{context_weight, ContextWeights, QueryContext};
use crate::opinion::{combine, IntegrationParams, OpinionError, TrustOpinion};
use crate::repo::{PrincipalId, RepoError, Repository, RepositoryVersion};

/// Credibility assigned to a rater nobody has rated yet.
pub const NEUTRAL_CREDIBILITY: f64 = 0.5;

/// Aggregates whose total weight falls below this are reported absent
/// instead of risking amplified noise from a near-zero denominator.
pub const MIN_DENOMINATOR: f64 = 1e-12;

/// One aggregated trust component. `value` is `None` exactly when no
/// evidence contributed (`support == 0`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrustComponent {
    pub value: Option<f64>,
    /// Number of ratings that carried non-zero weight.
    pub support: u32,
}

impl TrustComponent {
    pub fn absent() -> Self {
        TrustComponent { value: None, support: 0 }
    }

    pub fn of(value: f64, support: u32) -> Self {
        TrustComponent { value: Some(value), support }
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }

    pub fn is_present(&self) -> bool {
        self.value.is_some()
    }
}

/// The viewer's own latest rating of the subject, if any.
pub fn direct_trust(
    repo: &Repository,
    viewer: &PrincipalId,
    subject: &PrincipalId,
) -> Result<TrustComponent, RepoError> {
    ensure_registered(repo, viewer)?;
    ensure_registered(repo, subject)?;
    Ok(match repo.latest_rating(viewer, subject) {
        Some(r) => TrustComponent::of(r.value, 1),
        None => TrustComponent::absent(),
    })
}

/// How much the viewer should believe `rater`.
///
/// The viewer's own rating of the rater wins when it exists. Otherwise the
/// plain mean of the latest ratings about the rater stands in, and a rater
/// nobody has rated gets the neutral prior. Exactly one level: credibility
/// of a rater is never itself credibility-weighted, so there is no regress.
pub fn rater_credibility(
    repo: &Repository,
    viewer: &PrincipalId,
    rater: &PrincipalId,
) -> Result<f64, RepoError> {
    ensure_registered(repo, viewer)?;
    ensure_registered(repo, rater)?;
    if let Some(own) = repo.latest_rating(viewer, rater) {
        return Ok(own.value);
    }
    let incoming = repo.ratings_about(rater);
    if incoming.is_empty() {
        Ok(NEUTRAL_CREDIBILITY)
    } else {
        Ok(incoming.iter().map(|r| r.value).sum::<f64>() / incoming.len() as f64)
    }
}

/// Credibility- and context-weighted mean of the latest ratings about the
/// subject, excluding anything the viewer said themselves.
pub fn recommended_trust(
    repo: &Repository,
    viewer: &PrincipalId,
    subject: &PrincipalId,
    query: &QueryContext,
    weights: &ContextWeights,
    credibility_weighting: bool,
) -> Result<TrustComponent, RepoError> {
    let viewer_root = repo
        .canonical(viewer)
        .ok_or_else(|| RepoError::UnknownPrincipal(viewer.clone()))?
        .clone();
    ensure_registered(repo, subject)?;

    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut support = 0;
    // ratings_about iterates in ascending canonical-rater order, which fixes
    // the floating point summation order across runs and replays.
    for rating in repo.ratings_about(subject) {
        if repo.canonical(&rating.rater) == Some(&viewer_root) {
            continue;
        }
        let credibility = if credibility_weighting {
            rater_credibility(repo, viewer, &rating.rater)?
        } else {
            1.0
        };
        let tx = repo
            .transaction(&rating.tx_id)
            .expect("repository guarantees ratings reference stored transactions");
        let weight = credibility * context_weight(tx, query, weights);
        numerator += weight * rating.value;
        denominator += weight;
        if weight > 0.0 {
            support += 1;
        }
    }
    if denominator < MIN_DENOMINATOR {
        Ok(TrustComponent::absent())
    } else {
        Ok(TrustComponent::of(numerator / denominator, support))
    }
}

/// Fresh opinion, recomputed from the repository on every call.
pub fn dtc_opinion(
    repo: &Repository,
    viewer: &PrincipalId,
    subject: &PrincipalId,
    query: &QueryContext,
    params: &IntegrationParams,
    weights: &ContextWeights,
) -> Result<TrustOpinion, OpinionError> {
    let (_, subject_root) = resolve_pair(repo, viewer, subject)?;
    let verification = repo
        .verification_score(&subject_root)
        .expect("registered identity has a reputation record");
    if verification < params.min_verification {
        return Err(OpinionError::BelowVerificationFloor {
            floor: params.min_verification,
            score: verification,
        });
    }
    let direct = direct_trust(repo, viewer, subject)?;
    let recommended = recommended_trust(
        repo,
        viewer,
        subject,
        query,
        weights,
        params.credibility_weighting,
    )?;
    let (score, components_used) = combine(
        verification,
        &direct,
        &recommended,
        (params.alpha, params.beta, params.gamma),
    );
    Ok(TrustOpinion {
        score,
        verification,
        direct,
        recommended,
        components_used,
        repo_version: repo.version(),
    })
}

// ---------------------------------------------------------------------------
// cached mode

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct CacheKey {
    viewer: PrincipalId,
    subject: PrincipalId,
    scope: Option<String>,
    /// Digest of the engine parameters the entry was computed under; a
    /// parameter change is a different key, never a stale hit.
    params_digest: String,
}

#[derive(Debug, Clone)]
struct CacheEntry {
    opinion: TrustOpinion,
    version: RepositoryVersion,
}

/// Opinion cache for ATC mode. Interior-mutable so lookups work through
/// shared references; the mutex also keeps concurrent fills consistent.
#[derive(Debug, Default)]
pub struct AtcCache {
    entries: Mutex<BTreeMap<CacheKey, CacheEntry>>,
}

impl AtcCache {
    pub fn new() -> Self {
        AtcCache::default()
    }

    pub fn flush(&self) {
        self.entries.lock().expect("cache lock").clear();
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Cached opinion. Serves the stored answer while its version lag is within
/// `staleness_events`, otherwise recomputes via [`dtc_opinion`] and stores
/// the result.
#[allow(clippy::too_many_arguments)]
pub fn atc_opinion(
    repo: &Repository,
    cache: &AtcCache,
    viewer: &PrincipalId,
    subject: &PrincipalId,
    query: &QueryContext,
    params: &IntegrationParams,
    weights: &ContextWeights,
    staleness_events: u64,
    params_digest: &str,
) -> Result<TrustOpinion, OpinionError> {
    let (viewer_root, subject_root) = resolve_pair(repo, viewer, subject)?;
    let key = CacheKey {
        viewer: viewer_root,
        subject: subject_root,
        scope: query.scope.clone(),
        params_digest: params_digest.to_string(),
    };
    let current = repo.version();
    {
        let entries = cache.entries.lock().expect("cache lock");
        if let Some(entry) = entries.get(&key) {
            if current.0.saturating_sub(entry.version.0) <= staleness_events {
                return Ok(entry.opinion.clone());
            }
        }
    }
    let fresh = dtc_opinion(repo, viewer, subject, query, params, weights)?;
    cache.entries.lock().expect("cache lock").insert(
        key,
        CacheEntry { opinion: fresh.clone(), version: current },
    );
    Ok(fresh)
}

/// Existence and self-opinion gates shared by both modes. Keys are always
/// canonical ids, so opinions about an alias hit the same cache slot.
fn resolve_pair(
    repo: &Repository,
    viewer: &PrincipalId,
    subject: &PrincipalId,
) -> Result<(PrincipalId, PrincipalId), OpinionError> {
    let viewer_root = repo
        .canonical(viewer)
        .ok_or_else(|| RepoError::UnknownPrincipal(viewer.clone()))?;
    let subject_root = repo
        .canonical(subject)
        .ok_or_else(|| RepoError::UnknownPrincipal(subject.clone()))?;
    if viewer_root == subject_root {
        return Err(OpinionError::SelfOpinion);
    }
    Ok((viewer_root.clone(), subject_root.clone()))
}

fn ensure_registered(repo: &Repository, id: &PrincipalId) -> Result<(), RepoError> {
    if repo.is_registered(id) {
        Ok(())
    } else {
        Err(RepoError::UnknownPrincipal(id.clone()))
    }
}
