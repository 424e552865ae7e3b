//! Blending verification, direct experience and recommendations into one
//! trust score.
//!
//! The three inputs rarely all exist. A fresh subject has no ratings at all;
//! a viewer may never have dealt with the subject directly. Rather than
//! padding missing components with a made-up neutral value, the combiner
//! renormalizes the configured weights over whatever is actually present.
//! With nothing but the verification score available the opinion passes that
//! score through untouched, which is what gives a policy-verified newcomer a
//! non-zero starting point.

use serde::{Deserialize, Serialize};

use crate::policy::WEIGHT_SUM_TOLERANCE;
use crate::repo::{RepoError, RepositoryVersion};
use crate::reputation::TrustComponent;

/// Weights for verification (`alpha`), direct trust (`beta`) and
/// recommended trust (`gamma`), plus the eligibility floor a subject's
/// verification score must clear before anyone gets an opinion about them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub min_verification: f64,
    /// When false, every rater counts with full credibility. Exists so the
    /// effect of credibility weighting can be measured, not for production.
    #[serde(default = "default_true")]
    pub credibility_weighting: bool,
}

fn default_true() -> bool {
    true
}

impl Default for IntegrationParams {
    fn default() -> Self {
        IntegrationParams {
            alpha: 0.2,
            beta: 0.3,
            gamma: 0.5,
            min_verification: 0.2,
            credibility_weighting: true,
        }
    }
}

impl IntegrationParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return Err(format!("integration weight {name} must lie in [0, 1], got {w}"));
            }
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(format!("integration weights sum to {sum}, expected 1"));
        }
        if !self.min_verification.is_finite() || !(0.0..=1.0).contains(&self.min_verification) {
            return Err(format!(
                "min_verification must lie in [0, 1], got {}",
                self.min_verification
            ));
        }
        Ok(())
    }
}

/// Which inputs actually entered an opinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "V")]
    Verification,
    #[serde(rename = "D")]
    Direct,
    #[serde(rename = "R")]
    Recommended,
}

/// A computed trust opinion of one viewer about one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustOpinion {
    pub score: f64,
    pub verification: f64,
    pub direct: TrustComponent,
    pub recommended: TrustComponent,
    pub components_used: Vec<Component>,
    /// Repository version the opinion was computed at.
    pub repo_version: RepositoryVersion,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpinionError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error("viewer and subject resolve to the same identity")]
    SelfOpinion,
    #[error("subject verification score {score} is below the eligibility floor {floor}")]
    BelowVerificationFloor { floor: f64, score: f64 },
}

/// Weighted combination over present components.
///
/// Verification is always present. Absent direct/recommended components drop
/// out and the remaining weights are renormalized; when both are absent the
/// verification score is returned as-is (same bits, no arithmetic). Should
/// every present component carry zero weight, the combiner falls back to
/// their plain mean rather than dividing by zero.
pub fn combine(
    verification: f64,
    direct: &TrustComponent,
    recommended: &TrustComponent,
    weights: (f64, f64, f64),
) -> (f64, Vec<Component>) {
    let (alpha, beta, gamma) = weights;
    let mut used = vec![Component::Verification];
    if direct.value().is_none() && recommended.value().is_none() {
        return (verification, used);
    }
    let mut numerator = alpha * verification;
    let mut denominator = alpha;
    let mut present = vec![verification];
    if let Some(d) = direct.value() {
        used.push(Component::Direct);
        numerator += beta * d;
        denominator += beta;
        present.push(d);
    }
    if let Some(r) = recommended.value() {
        used.push(Component::Recommended);
        numerator += gamma * r;
        denominator += gamma;
        present.push(r);
    }
    let score = if denominator < 1e-12 {
        present.iter().sum::<f64>() / present.len() as f64
    } else {
        numerator / denominator
    };
    (score, used)
}
