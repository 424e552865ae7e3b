//! Engine configuration: tier policies, integration and context weights,
//! cache behavior, and (for the CLI) the repository location.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::context::ContextWeights;
use crate::opinion::IntegrationParams;
use crate::policy::{RequiredAttr, TierPolicy};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CacheSettings {
    /// How many repository versions an ATC cache entry may lag before it is
    /// recomputed. 0 means cached answers are served only for unchanged
    /// state, making ATC indistinguishable from DTC.
    #[serde(default)]
    pub staleness_events: u64,
}


/// Everything the engine needs to run in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub tiers: Vec<TierPolicy>,
    #[serde(default)]
    pub integration: IntegrationParams,
    #[serde(default)]
    pub context: ContextWeights,
    #[serde(default)]
    pub cache: CacheSettings,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams::standard()
    }
}

impl EngineParams {
    /// A workable single-tier setup: email (0.2), payment (0.3) and a
    /// government id (0.5), with the id as the strong attribute.
    pub fn standard() -> Self {
        EngineParams {
            tiers: vec![TierPolicy {
                tier: "standard".into(),
                required: vec![
                    RequiredAttr { name: "email".into(), weight: 0.2 },
                    RequiredAttr { name: "payment".into(), weight: 0.3 },
                    RequiredAttr { name: "gov_id".into(), weight: 0.5 },
                ],
                strong: vec!["gov_id".into()],
            }],
            integration: IntegrationParams::default(),
            context: ContextWeights::default(),
            cache: CacheSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tiers.is_empty() {
            return Err(ConfigError::Invalid("at least one tier is required".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for tier in &self.tiers {
            tier.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if !names.insert(tier.tier.as_str()) {
                return Err(ConfigError::Invalid(format!(
                    "tier `{}` is defined twice",
                    tier.tier
                )));
            }
        }
        self.integration.validate().map_err(ConfigError::Invalid)?;
        self.context.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn tier(&self, name: &str) -> Option<&TierPolicy> {
        self.tiers.iter().find(|t| t.tier == name)
    }

    /// Digest over the canonical JSON form. Cache entries are keyed by this,
    /// so any parameter change invalidates them without an explicit flush.
    pub fn digest(&self) -> String {
        let canonical = crate::canonical_json(self);
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// On-disk configuration for the CLI: engine parameters plus where the
/// repository lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(flatten)]
    pub params: EngineParams,
    pub repository: PathBuf,
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: EngineConfig = serde_json::from_str(text)?;
        config.params.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        EngineConfig::from_json(&std::fs::read_to_string(path)?)
    }
}
