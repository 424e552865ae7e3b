//! Deterministic market scenarios.
//!
//! A scenario is split into two halves. Generation scripts the whole market
//! from a seeded RNG and produces an event log plus a roster; evaluation
//! replays that log tick by tick and measures trust opinions through a
//! dedicated observer principal. The split is what makes A/B comparisons
//! honest: `compare_runs` generates one script and re-evaluates the same
//! events under different engine parameters, so parameter effects are never
//! confounded with different random histories.
//!
//! # Determinism
//!
//! All randomness comes from one `ChaCha8` stream seeded with the scenario
//! seed. Per tick the draws happen in this fixed order:
//!
//! 1. Whitewash rebirth, when due this tick (no draws).
//! 2. Honest buyers in roster order. Each buyer draws, in order: the seller
//!    pick (one integer in `0..sellers` for uniform selection, or one `f64`
//!    for trust-weighted selection), the cost (one integer in the
//!    configured minor-unit range, skipped when the pick landed on the
//!    context-exploit seller, whose prices are scripted), and the outcome
//!    (one `f64` compared against the seller's honesty, likewise skipped
//!    for the exploit seller).
//! 3. Attack behavior in roster order (no draws: colluding and slandering
//!    agents act unconditionally).
//!
//! Two runs of the same scenario therefore produce byte-identical logs,
//! state exports and metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CacheSettings, EngineParams};
use crate::context::{ContextWeights, QueryContext};
use crate::cost::Cost;
use crate::engine::{ComputeMode, EngineError, TrustEngine};
use crate::opinion::IntegrationParams;
use crate::policy::Credential;
use crate::repo::{Event, EventBody, PrincipalId, Repository, TxId};
use crate::reputation::{atc_opinion, dtc_opinion, AtcCache};

const OBSERVER_ID: &str = "observer";
const SCOPE: &str = "general";
const PROMISED_DAYS: u32 = 5;
/// Honesty of the seller a collusion ring promotes.
const COLLUDER_HONESTY: f64 = 0.2;
/// Honesty of ring members in their own seller role. Shills must trade for
/// their praise to exist at all, and trading exposes them to honest ratings.
const SHILL_HONESTY: f64 = 0.15;

// ---------------------------------------------------------------------------
// scenario configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Buyer,
    Seller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    /// Class name; members get ids `{name}-1`, `{name}-2`, ...
    pub name: String,
    pub role: Role,
    pub count: u32,
    /// Probability that a sale by this agent satisfies the buyer.
    #[serde(default = "default_honesty")]
    pub honesty: f64,
    /// Tier to register under; defaults to the first configured tier.
    #[serde(default)]
    pub tier: Option<String>,
    /// Required attributes that verify at registration; absent means all.
    #[serde(default)]
    pub verified_attrs: Option<Vec<String>>,
    #[serde(default)]
    pub adversarial: bool,
}

fn default_honesty() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attack {
    None,
    /// Injects one low-honesty seller plus `ring_size` shills that buy from
    /// it every tick and exchange perfect ratings with it.
    Collusion { ring_size: u32 },
    /// Injects buyers that purchase from the first member of `target` every
    /// tick and rate it 0 regardless of outcome.
    Slander { attacker_count: u32, target: String },
    /// The first member of `fraud_seller` abandons its account at
    /// `rebirth_tick` and re-registers; with `fresh_identity` the strong
    /// credentials change too, otherwise they are identical.
    Whitewash {
        fraud_seller: String,
        rebirth_tick: u64,
        #[serde(default)]
        fresh_identity: bool,
    },
    /// Injects a seller that sells honestly at `cheap_cost` but defrauds on
    /// every `expensive_every`-th sale at `expensive_cost`.
    ContextExploit {
        cheap_cost: Cost,
        expensive_cost: Cost,
        expensive_every: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellerSelection {
    /// Buyers pick uniformly among active sellers.
    Uniform,
    /// Buyers pick proportionally to their current trust opinions.
    TrustWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub ticks: u64,
    pub agents: Vec<AgentProfile>,
    #[serde(default = "default_attack")]
    pub attack: Attack,
    pub engine: EngineParams,
    #[serde(default = "default_cost_min")]
    pub cost_min: Cost,
    #[serde(default = "default_cost_max")]
    pub cost_max: Cost,
    #[serde(default = "default_selection")]
    pub seller_selection: SellerSelection,
}

fn default_attack() -> Attack {
    Attack::None
}

fn default_cost_min() -> Cost {
    Cost::from_minor_units(500) // 5.00
}

fn default_cost_max() -> Cost {
    Cost::from_minor_units(50_000) // 500.00
}

fn default_selection() -> SellerSelection {
    SellerSelection::Uniform
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidConfig(msg.into())
}

/// Class names the harness assigns itself.
const RESERVED_CLASSES: [&str; 5] = [
    OBSERVER_ID,
    "colluded_seller",
    "shill",
    "slanderer",
    "exploit_seller",
];

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        ScenarioConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.engine
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        if self.agents.is_empty() {
            return Err(invalid("at least one agent profile is required"));
        }
        let mut names = std::collections::BTreeSet::new();
        for profile in &self.agents {
            if profile.name.is_empty()
                || profile.name.contains(',')
                || profile.name.contains(char::is_whitespace)
            {
                return Err(invalid(format!(
                    "class name `{}` must be non-empty without commas or whitespace",
                    profile.name
                )));
            }
            if RESERVED_CLASSES.contains(&profile.name.as_str()) {
                return Err(invalid(format!("class name `{}` is reserved", profile.name)));
            }
            if !names.insert(profile.name.as_str()) {
                return Err(invalid(format!("class `{}` is defined twice", profile.name)));
            }
            if !profile.honesty.is_finite() || !(0.0..=1.0).contains(&profile.honesty) {
                return Err(invalid(format!(
                    "honesty of `{}` must lie in [0, 1]",
                    profile.name
                )));
            }
            if let Some(tier) = &profile.tier {
                if self.engine.tier(tier).is_none() {
                    return Err(invalid(format!(
                        "class `{}` uses unknown tier `{tier}`",
                        profile.name
                    )));
                }
            }
            if let Some(attrs) = &profile.verified_attrs {
                let policy = self.tier_for(profile);
                for attr in attrs {
                    if !policy.requires(attr) {
                        return Err(invalid(format!(
                            "class `{}` marks unknown attribute `{attr}` as verified",
                            profile.name
                        )));
                    }
                }
            }
        }
        let honest_buyers = self
            .agents
            .iter()
            .any(|p| p.role == Role::Buyer && !p.adversarial && p.count > 0);
        let sellers = self.agents.iter().any(|p| p.role == Role::Seller && p.count > 0);
        if !honest_buyers || !sellers {
            return Err(invalid(
                "scenarios need at least one non-adversarial buyer and one seller",
            ));
        }
        if self.cost_min > self.cost_max {
            return Err(invalid("cost_min exceeds cost_max"));
        }
        match &self.attack {
            Attack::None => {}
            Attack::Collusion { ring_size } => {
                if *ring_size == 0 {
                    return Err(invalid("collusion ring_size must be at least 1"));
                }
            }
            Attack::Slander { attacker_count, target } => {
                if *attacker_count == 0 {
                    return Err(invalid("slander attacker_count must be at least 1"));
                }
                self.seller_class(target, "slander target")?;
            }
            Attack::Whitewash { fraud_seller, rebirth_tick, .. } => {
                self.seller_class(fraud_seller, "whitewash fraud_seller")?;
                if *rebirth_tick == 0 || *rebirth_tick > self.ticks {
                    return Err(invalid(format!(
                        "rebirth_tick must lie in 1..={}, got {rebirth_tick}",
                        self.ticks
                    )));
                }
            }
            Attack::ContextExploit { cheap_cost, expensive_cost, expensive_every } => {
                if *expensive_every < 2 {
                    return Err(invalid("expensive_every must be at least 2"));
                }
                if cheap_cost >= expensive_cost {
                    return Err(invalid("cheap_cost must be below expensive_cost"));
                }
            }
        }
        Ok(())
    }

    fn seller_class(&self, name: &str, what: &str) -> Result<&AgentProfile, SimError> {
        self.agents
            .iter()
            .find(|p| p.name == name && p.role == Role::Seller && p.count > 0)
            .ok_or_else(|| invalid(format!("{what} `{name}` is not a populated seller class")))
    }

    fn tier_for(&self, profile: &AgentProfile) -> &crate::policy::TierPolicy {
        match &profile.tier {
            Some(name) => self.engine.tier(name).expect("validated"),
            None => &self.engine.tiers[0],
        }
    }
}

// ---------------------------------------------------------------------------
// script

#[derive(Debug, Clone, PartialEq)]
pub struct RosterEntry {
    pub class: String,
    pub principal: PrincipalId,
    pub role: Role,
    pub honesty: f64,
    pub adversarial: bool,
    /// First tick this entry takes part in the market.
    pub active_from: u64,
    /// Last active tick, inclusive; `None` means until the end of the run.
    pub active_to: Option<u64>,
}

impl RosterEntry {
    pub fn active_at(&self, tick: u64) -> bool {
        self.active_from <= tick && self.active_to.is_none_or(|end| tick <= end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhitewashIds {
    pub old: PrincipalId,
    pub new: PrincipalId,
    pub rebirth_tick: u64,
}

/// A fully generated scenario: the event log plus everything evaluation
/// needs to interpret it.
#[derive(Debug, Clone)]
pub struct SimScript {
    pub seed: u64,
    pub ticks: u64,
    pub events: Vec<Event>,
    pub roster: Vec<RosterEntry>,
    pub observer: PrincipalId,
    /// Forged-rating attempts the repository turned away during generation.
    pub guard_rejections: u64,
    pub whitewash: Option<WhitewashIds>,
    /// Canonical state export of the generating engine, for replay audits.
    pub final_state: String,
}

struct Generator {
    engine: TrustEngine,
    rng: ChaCha8Rng,
    roster: Vec<RosterEntry>,
    guard_rejections: u64,
    whitewash: Option<WhitewashIds>,
    exploit_sales: u64,
}

/// Scripts a whole scenario into an event log. See the module docs for the
/// draw-order contract.
pub fn build_script(config: &ScenarioConfig) -> Result<SimScript, SimError> {
    config.validate()?;
    let engine = TrustEngine::new(config.engine.clone())
        .map_err(|e| invalid(e.to_string()))?;
    let mut generator = Generator {
        engine,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        roster: Vec::new(),
        guard_rejections: 0,
        whitewash: None,
        exploit_sales: 0,
    };
    generator.populate(config)?;
    for tick in 1..=config.ticks {
        generator.run_tick(config, tick)?;
    }
    let Generator { engine, roster, guard_rejections, whitewash, .. } = generator;
    Ok(SimScript {
        seed: config.seed,
        ticks: config.ticks,
        events: engine.repo().events().to_vec(),
        roster,
        observer: PrincipalId::new(OBSERVER_ID),
        guard_rejections,
        whitewash,
        final_state: engine.repo().export_state_canonical(),
    })
}

impl Generator {
    fn populate(&mut self, config: &ScenarioConfig) -> Result<(), SimError> {
        self.engine.set_tick(0);
        for profile in &config.agents {
            for i in 1..=profile.count {
                self.roster.push(RosterEntry {
                    class: profile.name.clone(),
                    principal: PrincipalId::new(format!("{}-{i}", profile.name)),
                    role: profile.role,
                    honesty: profile.honesty,
                    adversarial: profile.adversarial,
                    active_from: 0,
                    active_to: None,
                });
            }
        }
        match &config.attack {
            Attack::Collusion { ring_size } => {
                self.roster.push(RosterEntry {
                    class: "colluded_seller".into(),
                    principal: PrincipalId::new("colluded_seller-1"),
                    role: Role::Seller,
                    honesty: COLLUDER_HONESTY,
                    adversarial: true,
                    active_from: 0,
                    active_to: None,
                });
                for i in 1..=*ring_size {
                    self.roster.push(RosterEntry {
                        class: "shill".into(),
                        principal: PrincipalId::new(format!("shill-{i}")),
                        role: Role::Seller,
                        honesty: SHILL_HONESTY,
                        adversarial: true,
                        active_from: 0,
                        active_to: None,
                    });
                }
            }
            Attack::Slander { attacker_count, .. } => {
                for i in 1..=*attacker_count {
                    self.roster.push(RosterEntry {
                        class: "slanderer".into(),
                        principal: PrincipalId::new(format!("slanderer-{i}")),
                        role: Role::Buyer,
                        honesty: 1.0,
                        adversarial: true,
                        active_from: 0,
                        active_to: None,
                    });
                }
            }
            Attack::ContextExploit { .. } => {
                self.roster.push(RosterEntry {
                    class: "exploit_seller".into(),
                    principal: PrincipalId::new("exploit_seller-1"),
                    role: Role::Seller,
                    honesty: 1.0, // unused: its outcomes are scripted
                    adversarial: true,
                    active_from: 0,
                    active_to: None,
                });
            }
            Attack::None | Attack::Whitewash { .. } => {}
        }

        // Profile-driven credentials for config classes, full credentials
        // for everything the harness injects.
        let class_profile: BTreeMap<&str, &AgentProfile> =
            config.agents.iter().map(|p| (p.name.as_str(), p)).collect();
        for idx in 0..self.roster.len() {
            let entry = self.roster[idx].clone();
            let (tier, verified) = match class_profile.get(entry.class.as_str()) {
                Some(profile) => (
                    config.tier_for(profile).tier.clone(),
                    profile.verified_attrs.clone(),
                ),
                None => (config.engine.tiers[0].tier.clone(), None),
            };
            self.register(&entry.principal, &tier, &verified, entry.principal.as_str(), config)?;
        }
        self.register(
            &PrincipalId::new(OBSERVER_ID),
            &config.engine.tiers[0].tier.clone(),
            &None,
            OBSERVER_ID,
            config,
        )?;
        Ok(())
    }

    /// Registers `id` with one credential per required attribute of `tier`.
    /// Values are derived from `identity_salt`, so equal salts mean equal
    /// strong credentials and therefore equal fingerprints.
    fn register(
        &mut self,
        id: &PrincipalId,
        tier: &str,
        verified: &Option<Vec<String>>,
        identity_salt: &str,
        config: &ScenarioConfig,
    ) -> Result<(), SimError> {
        let policy = config.engine.tier(tier).expect("validated").clone();
        let creds = policy
            .required
            .iter()
            .map(|attr| {
                let is_verified = verified.as_ref().is_none_or(|v| v.contains(&attr.name));
                (
                    attr.name.clone(),
                    Credential {
                        value: format!("{}:{identity_salt}", attr.name),
                        verified: is_verified,
                    },
                )
            })
            .collect();
        self.engine.register_as(id.clone(), tier, &creds)?;
        Ok(())
    }

    fn run_tick(&mut self, config: &ScenarioConfig, tick: u64) -> Result<(), SimError> {
        self.engine.set_tick(tick);
        self.rebirth_if_due(config, tick)?;
        self.honest_purchases(config, tick)?;
        self.attack_moves(config, tick)?;
        Ok(())
    }

    fn rebirth_if_due(&mut self, config: &ScenarioConfig, tick: u64) -> Result<(), SimError> {
        let Attack::Whitewash { fraud_seller, rebirth_tick, fresh_identity } = &config.attack
        else {
            return Ok(());
        };
        if tick != *rebirth_tick {
            return Ok(());
        }
        let slot = self
            .roster
            .iter()
            .position(|e| e.class == *fraud_seller && e.active_to.is_none())
            .expect("validated seller class");
        self.roster[slot].active_to = Some(tick - 1);
        let old = self.roster[slot].principal.clone();
        let new_id = PrincipalId::new(format!("{old}-r"));
        let salt = if *fresh_identity {
            format!("{old}+fresh")
        } else {
            old.to_string()
        };
        let profile = config
            .agents
            .iter()
            .find(|p| p.name == *fraud_seller)
            .expect("validated");
        let tier = config.tier_for(profile).tier.clone();
        self.register(&new_id, &tier, &profile.verified_attrs.clone(), &salt, config)?;
        let template = self.roster[slot].clone();
        self.roster.push(RosterEntry {
            principal: new_id.clone(),
            active_from: tick,
            active_to: None,
            ..template
        });
        self.whitewash = Some(WhitewashIds { old, new: new_id, rebirth_tick: tick });
        Ok(())
    }

    fn honest_purchases(&mut self, config: &ScenarioConfig, tick: u64) -> Result<(), SimError> {
        let buyers: Vec<PrincipalId> = self
            .roster
            .iter()
            .filter(|e| e.role == Role::Buyer && !e.adversarial && e.active_at(tick))
            .map(|e| e.principal.clone())
            .collect();
        let sellers: Vec<(PrincipalId, f64)> = self
            .roster
            .iter()
            .filter(|e| e.role == Role::Seller && e.active_at(tick))
            .map(|e| (e.principal.clone(), e.honesty))
            .collect();
        if sellers.is_empty() {
            return Ok(());
        }
        for buyer in buyers {
            let pick = self.pick_seller(config, &buyer, &sellers);
            let (seller, honesty) = &sellers[pick];
            let exploit = matches!(config.attack, Attack::ContextExploit { .. })
                && seller.as_str() == "exploit_seller-1";
            let (cost, satisfied) = if exploit {
                let Attack::ContextExploit { cheap_cost, expensive_cost, expensive_every } =
                    &config.attack
                else {
                    unreachable!()
                };
                self.exploit_sales += 1;
                if self.exploit_sales.is_multiple_of(u64::from(*expensive_every)) {
                    (*expensive_cost, false)
                } else {
                    (*cheap_cost, true)
                }
            } else {
                let cents = self
                    .rng
                    .gen_range(config.cost_min.minor_units()..=config.cost_max.minor_units());
                let satisfied = self.rng.gen::<f64>() < *honesty;
                (Cost::from_minor_units(cents), satisfied)
            };
            self.trade(&buyer, seller, cost, if satisfied { 1.0 } else { 0.0 })?;
        }
        Ok(())
    }

    fn pick_seller(
        &mut self,
        config: &ScenarioConfig,
        buyer: &PrincipalId,
        sellers: &[(PrincipalId, f64)],
    ) -> usize {
        match config.seller_selection {
            SellerSelection::Uniform => self.rng.gen_range(0..sellers.len()),
            SellerSelection::TrustWeighted => {
                let weights: Vec<f64> = sellers
                    .iter()
                    .map(|(id, _)| {
                        self.engine
                            .opinion(buyer, id, &QueryContext::any(), ComputeMode::Atc)
                            .map(|o| o.score.max(0.0))
                            .unwrap_or(0.0)
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                let u = self.rng.gen::<f64>();
                if total <= 0.0 {
                    // Nobody is trusted (or scorable) yet: spread uniformly.
                    return ((u * sellers.len() as f64) as usize).min(sellers.len() - 1);
                }
                let mut remaining = u * total;
                for (i, w) in weights.iter().enumerate() {
                    remaining -= w;
                    if remaining <= 0.0 {
                        return i;
                    }
                }
                sellers.len() - 1
            }
        }
    }

    /// One transaction plus the two cross ratings: the buyer grades the
    /// outcome, the seller (wanting repeat business) rates the buyer 1.
    fn trade(
        &mut self,
        buyer: &PrincipalId,
        seller: &PrincipalId,
        cost: Cost,
        buyer_rating: f64,
    ) -> Result<(), SimError> {
        let tx = self
            .engine
            .record_transaction(buyer, seller, cost, SCOPE, PROMISED_DAYS, PROMISED_DAYS)?;
        self.engine
            .rate_after_transaction(buyer, seller, &tx.tx_id, buyer_rating)?;
        self.engine
            .rate_after_transaction(seller, buyer, &tx.tx_id, 1.0)?;
        Ok(())
    }

    fn attack_moves(&mut self, config: &ScenarioConfig, tick: u64) -> Result<(), SimError> {
        match &config.attack {
            Attack::Collusion { .. } => {
                let colluder = PrincipalId::new("colluded_seller-1");
                let shills: Vec<PrincipalId> = self
                    .roster
                    .iter()
                    .filter(|e| e.class == "shill")
                    .map(|e| e.principal.clone())
                    .collect();
                for shill in shills {
                    // The ring manufactures cheap mutual praise every tick.
                    self.trade(&shill, &colluder, config.cost_min, 1.0)?;
                }
            }
            Attack::Slander { target, .. } => {
                let target = PrincipalId::new(format!("{target}-1"));
                let slanderers: Vec<PrincipalId> = self
                    .roster
                    .iter()
                    .filter(|e| e.class == "slanderer")
                    .map(|e| e.principal.clone())
                    .collect();
                for slanderer in slanderers {
                    if tick == 1 {
                        // Try to defame without any transaction, by rating
                        // against someone else's. The repository must refuse.
                        let err = self
                            .engine
                            .rate_after_transaction(&slanderer, &target, &TxId::new("t1"), 0.0)
                            .expect_err("foreign transaction must be rejected");
                        if matches!(err, EngineError::NotAParty { .. }) {
                            self.guard_rejections += 1;
                        }
                    }
                    // The paid route: a real cheap purchase, then a zero
                    // rating no matter how the sale went.
                    self.trade(&slanderer, &target, config.cost_min, 0.0)?;
                }
            }
            Attack::None | Attack::Whitewash { .. } | Attack::ContextExploit { .. } => {}
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// evaluation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub tick: u64,
    pub class: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Members that were scorable at the final tick.
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitewashReport {
    pub old_id: PrincipalId,
    pub new_id: PrincipalId,
    /// Observer's opinion of the old account just before rebirth.
    pub pre_score: f64,
    /// Observer's opinion of the new account right after it registered.
    pub post_score: f64,
    /// Verification score the new account started with.
    pub new_verification: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub ticks: u64,
    /// Digest of the engine parameters the evaluation ran under.
    pub params_digest: String,
    /// Per-tick per-class stats of the observer's opinions, tick-major in
    /// roster class order.
    pub series: Vec<SeriesRow>,
    pub final_per_class: BTreeMap<String, ClassStat>,
    /// Mean opinion of non-adversarial sellers minus mean opinion of
    /// adversarial sellers at the final tick, pooled over members. Absent
    /// when either group is empty.
    pub separation: Option<f64>,
    pub guard_rejections: u64,
    pub whitewash: Option<WhitewashReport>,
}

impl MetricsReport {
    pub fn to_canonical_json(&self) -> String {
        crate::canonical_json(self)
    }

    /// `tick,class,mean,min,max` rows, one per series entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,class,mean,min,max\n");
        for row in &self.series {
            writeln!(out, "{},{},{},{},{}", row.tick, row.class, row.mean, row.min, row.max)
                .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Replays a script under the given parameters and measures trust through
/// the observer after every tick.
pub fn evaluate(script: &SimScript, params: &EngineParams) -> Result<MetricsReport, SimError> {
    params.validate().map_err(|e| invalid(e.to_string()))?;
    let digest = params.digest();
    let mut repo = Repository::new();
    let cache = AtcCache::new();
    let observer = &script.observer;
    let classes: Vec<String> = {
        let mut seen = Vec::new();
        for entry in &script.roster {
            if !seen.contains(&entry.class) {
                seen.push(entry.class.clone());
            }
        }
        seen
    };

    let opinion_of = |repo: &Repository, cache: &AtcCache, subject: &PrincipalId| {
        atc_opinion(
            repo,
            cache,
            observer,
            subject,
            &QueryContext::any(),
            &params.integration,
            &params.context,
            params.cache.staleness_events,
            &digest,
        )
    };

    let mut series = Vec::new();
    let mut whitewash = None;
    let mut final_per_class = BTreeMap::new();
    let mut separation = None;
    let mut cursor = 0;

    for tick in 0..=script.ticks {
        while cursor < script.events.len() && script.events[cursor].tick == tick {
            let event = &script.events[cursor];
            let rebirth = script.whitewash.as_ref().filter(|w| {
                matches!(&event.body, EventBody::Registered(r) if r.principal == w.new)
            });
            // Around the rebirth event the observer's view is sampled fresh
            // on both sides, so the report captures the identity hand-off
            // exactly.
            let pre = match rebirth {
                Some(w) => Some(
                    dtc_opinion(
                        &repo,
                        observer,
                        &w.old,
                        &QueryContext::any(),
                        &params.integration,
                        &params.context,
                    )
                    .map_err(EngineError::from)?,
                ),
                None => None,
            };
            repo.append(event.tick, event.body.clone())
                .map_err(EngineError::from)?;
            if let (Some(w), Some(pre)) = (rebirth, pre) {
                let post = dtc_opinion(
                    &repo,
                    observer,
                    &w.new,
                    &QueryContext::any(),
                    &params.integration,
                    &params.context,
                )
                .map_err(EngineError::from)?;
                whitewash = Some(WhitewashReport {
                    old_id: w.old.clone(),
                    new_id: w.new.clone(),
                    pre_score: pre.score,
                    post_score: post.score,
                    new_verification: post.verification,
                });
            }
            cursor += 1;
        }

        for class in &classes {
            let mut scores = Vec::new();
            for entry in script.roster.iter().filter(|e| &e.class == class) {
                if !entry.active_at(tick) {
                    continue;
                }
                if let Ok(opinion) = opinion_of(&repo, &cache, &entry.principal) {
                    scores.push(opinion.score);
                }
            }
            if let Some(stat) = class_stat(&scores) {
                series.push(SeriesRow {
                    tick,
                    class: class.clone(),
                    mean: stat.mean,
                    min: stat.min,
                    max: stat.max,
                });
                if tick == script.ticks {
                    final_per_class.insert(class.clone(), stat);
                }
            }
        }

        if tick == script.ticks {
            let pooled = |adversarial: bool| {
                let mut values = Vec::new();
                for entry in &script.roster {
                    if entry.role == Role::Seller
                        && entry.adversarial == adversarial
                        && entry.active_at(tick)
                    {
                        if let Ok(opinion) = opinion_of(&repo, &cache, &entry.principal) {
                            values.push(opinion.score);
                        }
                    }
                }
                values
            };
            let honest = pooled(false);
            let adversarial = pooled(true);
            if !honest.is_empty() && !adversarial.is_empty() {
                separation = Some(mean(&honest) - mean(&adversarial));
            }
        }
    }

    Ok(MetricsReport {
        seed: script.seed,
        ticks: script.ticks,
        params_digest: digest,
        series,
        final_per_class,
        separation,
        guard_rejections: script.guard_rejections,
        whitewash,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn class_stat(scores: &[f64]) -> Option<ClassStat> {
    if scores.is_empty() {
        return None;
    }
    Some(ClassStat {
        mean: mean(scores),
        min: scores.iter().cloned().fold(f64::INFINITY, f64::min),
        max: scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        count: scores.len() as u32,
    })
}

/// Generates and evaluates a scenario under its own engine parameters.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(SimScript, MetricsReport), SimError> {
    let script = build_script(config)?;
    let metrics = evaluate(&script, &config.engine)?;
    Ok((script, metrics))
}

// ---------------------------------------------------------------------------
// A/B comparison

/// Engine-parameter overrides applied on top of the scenario's base
/// parameters. Tier policies are deliberately not overridable: they shape
/// registration events, which are part of the script, not the evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub name: String,
    #[serde(default)]
    pub integration: Option<IntegrationParams>,
    #[serde(default)]
    pub context: Option<ContextWeights>,
    #[serde(default)]
    pub cache: Option<CacheSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub variants: Vec<VariantReport>,
}

impl Comparison {
    pub fn report(&self, name: &str) -> Option<&MetricsReport> {
        self.variants.iter().find(|v| v.name == name).map(|v| &v.metrics)
    }

    /// `variant,class,mean,min,max` over final per-class stats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,class,mean,min,max\n");
        for variant in &self.variants {
            for (class, stat) in &variant.metrics.final_per_class {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    variant.name, class, stat.mean, stat.min, stat.max
                )
                .expect("writing to a String cannot fail");
            }
        }
        out
    }
}

/// Generates the script once, then evaluates it under each variant's
/// parameters. Differences between variant metrics are attributable to the
/// parameters alone.
pub fn compare_runs(
    config: &ScenarioConfig,
    variants: &[VariantSpec],
) -> Result<Comparison, SimError> {
    if variants.is_empty() {
        return Err(invalid("at least one variant is required"));
    }
    let mut names = std::collections::BTreeSet::new();
    for variant in variants {
        if !names.insert(variant.name.as_str()) {
            return Err(invalid(format!("variant `{}` is defined twice", variant.name)));
        }
    }
    let script = build_script(config)?;
    let mut reports = Vec::new();
    for variant in variants {
        let mut params = config.engine.clone();
        if let Some(integration) = &variant.integration {
            params.integration = integration.clone();
        }
        if let Some(context) = &variant.context {
            params.context = context.clone();
        }
        if let Some(cache) = &variant.cache {
            params.cache = cache.clone();
        }
        reports.push(VariantReport {
            name: variant.name.clone(),
            metrics: evaluate(&script, &params)?,
        });
    }
    Ok(Comparison { variants: reports })
}

/// Writes the artifacts of one scenario run into `dir`: `log.jsonl`,
/// `state.json`, `metrics.json` and `metrics.csv`.
pub fn write_outputs(
    dir: &Path,
    script: &SimScript,
    metrics: &MetricsReport,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("log.jsonl"), Repository::events_to_jsonl(&script.events))?;
    std::fs::write(dir.join("state.json"), &script.final_state)?;
    std::fs::write(dir.join("metrics.json"), metrics.to_canonical_json())?;
    std::fs::write(dir.join("metrics.csv"), metrics.to_csv())?;
    Ok(())
}
