//! Credential policies: minimal disclosure, graded verification, identity
//! fingerprints.
//!
//! A tier policy names the attributes a marketplace tier is allowed to ask
//! for. Registration is rejected outright if the requested attribute set
//! strays outside that list; verification of the disclosed attributes then
//! yields a weighted score in [0, 1] instead of a pass/fail bit. Attributes
//! marked `strong` additionally feed an identity fingerprint that survives
//! account re-creation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Tolerance for weight sums that are meant to be exactly 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    /// The request asked for attributes the tier policy does not require.
    /// Carries the sorted list of offending attribute names.
    #[error("disclosure request exceeds tier policy; extra attributes: {0:?}")]
    DisclosureViolation(Vec<String>),
    #[error("invalid tier policy: {0}")]
    InvalidPolicy(String),
}

/// One attribute a tier requires, with its share of the verification score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequiredAttr {
    pub name: String,
    pub weight: f64,
}

/// What one marketplace tier may ask a registrant for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierPolicy {
    pub tier: String,
    pub required: Vec<RequiredAttr>,
    /// Subset of `required` that identifies the registrant strongly enough
    /// for fingerprinting (government ids, tax numbers and the like).
    #[serde(default)]
    pub strong: Vec<String>,
}

impl TierPolicy {
    /// Invariants: non-empty tier name, unique attribute names, each weight
    /// in (0, 1], weights summing to 1, strong attrs drawn from required.
    pub fn validate(&self) -> Result<(), PolicyError> {
        let invalid = |msg: String| PolicyError::InvalidPolicy(msg);
        if self.tier.is_empty() {
            return Err(invalid("tier name must be non-empty".into()));
        }
        if self.required.is_empty() {
            return Err(invalid(format!("tier `{}` requires no attributes", self.tier)));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut sum = 0.0;
        for attr in &self.required {
            if attr.name.is_empty() {
                return Err(invalid(format!("tier `{}` has an unnamed attribute", self.tier)));
            }
            if !seen.insert(attr.name.as_str()) {
                return Err(invalid(format!(
                    "tier `{}` lists attribute `{}` twice",
                    self.tier, attr.name
                )));
            }
            if !attr.weight.is_finite() || attr.weight <= 0.0 || attr.weight > 1.0 {
                return Err(invalid(format!(
                    "weight of `{}` in tier `{}` must lie in (0, 1]",
                    attr.name, self.tier
                )));
            }
            sum += attr.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(invalid(format!(
                "weights of tier `{}` sum to {sum}, expected 1",
                self.tier
            )));
        }
        for name in &self.strong {
            if !seen.contains(name.as_str()) {
                return Err(invalid(format!(
                    "strong attribute `{name}` of tier `{}` is not in its required list",
                    self.tier
                )));
            }
        }
        Ok(())
    }

    pub fn requires(&self, name: &str) -> bool {
        self.required.iter().any(|a| a.name == name)
    }
}

/// A disclosed attribute value plus the outcome of checking it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credential {
    pub value: String,
    pub verified: bool,
}

/// Attributes disclosed at registration, keyed by attribute name.
pub type CredentialSet = BTreeMap<String, Credential>;

/// Convenience constructor for a credential set from `(name, value, verified)`
/// triples.
pub fn credential_set<N, V>(entries: impl IntoIterator<Item = (N, V, bool)>) -> CredentialSet
where
    N: Into<String>,
    V: Into<String>,
{
    entries
        .into_iter()
        .map(|(name, value, verified)| {
            (
                name.into(),
                Credential {
                    value: value.into(),
                    verified,
                },
            )
        })
        .collect()
}

/// Outcome of grading a credential set against a tier policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    /// Sum of the weights of required attributes that verified; in [0, 1].
    pub score: f64,
    /// Names of the required attributes that verified, sorted.
    pub verified_attrs: Vec<String>,
    /// Present only when every strong attribute verified.
    pub fingerprint: Option<String>,
}

/// Rejects requests that ask for anything beyond the tier's required list.
///
/// Asking for a strict subset is fine; the verification score simply loses
/// the weight of whatever was left out.
pub fn validate_disclosure_request<'a>(
    requested: impl IntoIterator<Item = &'a str>,
    policy: &TierPolicy,
) -> Result<(), PolicyError> {
    let mut extra: Vec<String> = requested
        .into_iter()
        .filter(|name| !policy.requires(name))
        .map(str::to_string)
        .collect();
    if extra.is_empty() {
        Ok(())
    } else {
        extra.sort();
        extra.dedup();
        Err(PolicyError::DisclosureViolation(extra))
    }
}

/// Grades disclosed credentials against a tier policy.
///
/// The score is the weight sum over required attributes that are present and
/// verified. Unknown attributes in `creds` contribute nothing here; they are
/// rejected earlier by [`validate_disclosure_request`] when the set came in
/// through a registration request.
pub fn verify_credentials(creds: &CredentialSet, policy: &TierPolicy) -> VerificationResult {
    let mut score = 0.0;
    let mut verified_attrs = Vec::new();
    for attr in &policy.required {
        if let Some(cred) = creds.get(&attr.name) {
            if cred.verified {
                score += attr.weight;
                verified_attrs.push(attr.name.clone());
            }
        }
    }
    verified_attrs.sort();
    VerificationResult {
        score,
        verified_attrs,
        fingerprint: identity_fingerprint(creds, policy),
    }
}

/// Stable digest of the strong attribute values, or `None` unless every
/// strong attribute is present and verified.
///
/// The digest is SHA-256 over one `name=value\n` line per strong attribute,
/// sorted by name, with values trimmed and lowercased. Two registrations that
/// disclose the same strong identity therefore collide on purpose, which is
/// what lets the repository pin a re-registered account to its old record.
pub fn identity_fingerprint(creds: &CredentialSet, policy: &TierPolicy) -> Option<String> {
    if policy.strong.is_empty() {
        return None;
    }
    let mut names: Vec<&String> = policy.strong.iter().collect();
    names.sort();
    names.dedup();
    let mut canonical = String::new();
    for name in names {
        let cred = creds.get(name)?;
        if !cred.verified {
            return None;
        }
        canonical.push_str(name);
        canonical.push('=');
        canonical.push_str(&cred.value.trim().to_lowercase());
        canonical.push('\n');
    }
    let digest = Sha256::digest(canonical.as_bytes());
    Some(hex::encode(digest))
}
