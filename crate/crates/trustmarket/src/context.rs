//! Transaction context scoring.
//!
//! A rating about a cheap trinket should not carry the same weight as one
//! about a high-value order, and ratings for the wrong product scope or for
//! late deliveries should fade. Each stored transaction is mapped to a weight
//! in [0, 1] from three signals: cost, scope match against the query, and
//! delivery punctuality.

use serde::{Deserialize, Serialize};

use crate::cost::Cost;
use crate::policy::WEIGHT_SUM_TOLERANCE;
use crate::repo::TransactionRecord;

/// Mixing weights for the three context signals, plus the cost level at
/// which a transaction counts as fully significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextWeights {
    pub w_cost: f64,
    pub w_scope: f64,
    pub w_delivery: f64,
    pub cost_cap: Cost,
}

impl Default for ContextWeights {
    fn default() -> Self {
        ContextWeights {
            w_cost: 0.5,
            w_scope: 0.2,
            w_delivery: 0.3,
            cost_cap: Cost::from_minor_units(1_000_000), // 10000.00
        }
    }
}

impl ContextWeights {
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [
            ("w_cost", self.w_cost),
            ("w_scope", self.w_scope),
            ("w_delivery", self.w_delivery),
        ] {
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return Err(format!("context weight {name} must lie in [0, 1], got {w}"));
            }
        }
        let sum = self.w_cost + self.w_scope + self.w_delivery;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(format!("context weights sum to {sum}, expected 1"));
        }
        if self.cost_cap == Cost::ZERO {
            return Err("cost_cap must be positive".into());
        }
        Ok(())
    }
}

/// The viewer's side of a trust query. An absent scope means "any product".
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QueryContext {
    pub scope: Option<String>,
}

impl QueryContext {
    pub fn any() -> Self {
        QueryContext { scope: None }
    }

    pub fn scoped(scope: impl Into<String>) -> Self {
        QueryContext { scope: Some(scope.into()) }
    }
}

/// Logarithmic cost significance: 0 at zero cost, 1 at or above the cap.
///
/// log(1 + cost) / log(1 + cap) rather than a linear ramp, so a tenfold cost
/// difference matters much more at the low end than near the cap.
pub fn cost_norm(cost: Cost, cost_cap: Cost) -> f64 {
    let denom = (1.0 + cost_cap.as_units()).ln();
    if denom <= 0.0 {
        return 1.0; // degenerate cap; validated configs never get here
    }
    let raw = (1.0 + cost.as_units()).ln() / denom;
    raw.min(1.0)
}

/// 1 when the query has no scope or matches the transaction scope
/// (case-insensitively), else 0.
pub fn scope_match(tx_scope: &str, query: &QueryContext) -> f64 {
    match &query.scope {
        None => 1.0,
        Some(wanted) => {
            if tx_scope.to_lowercase() == wanted.to_lowercase() {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// 1 for on-time or early delivery, falling linearly with relative overrun;
/// 0 once the promise was overrun by 100% or more.
pub fn delivery_score(promised_days: u32, actual_days: u32) -> f64 {
    debug_assert!(promised_days >= 1, "repository rejects promised_days == 0");
    let overrun = actual_days.saturating_sub(promised_days) as f64 / promised_days as f64;
    (1.0 - overrun).clamp(0.0, 1.0)
}

/// Composite context weight of one transaction under one query.
pub fn context_weight(tx: &TransactionRecord, query: &QueryContext, w: &ContextWeights) -> f64 {
    w.w_cost * cost_norm(tx.cost, w.cost_cap)
        + w.w_scope * scope_match(&tx.scope, query)
        + w.w_delivery * delivery_score(tx.promised_days, tx.actual_days)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repo::{PrincipalId, TxId};
    use proptest::prelude::*;

    fn tx(cost: &str, scope: &str, promised: u32, actual: u32) -> TransactionRecord {
        TransactionRecord {
            tx_id: TxId::new("t1"),
            buyer: PrincipalId::new("b"),
            seller: PrincipalId::new("s"),
            cost: cost.parse().unwrap(),
            scope: scope.into(),
            promised_days: promised,
            actual_days: actual,
            tick: 0,
        }
    }

    #[test]
    fn cost_norm_hits_known_points() {
        let cap: Cost = "9999.00".parse().unwrap();
        assert_eq!(cost_norm(Cost::ZERO, cap), 0.0);
        assert_eq!(cost_norm("9999.00".parse().unwrap(), cap), 1.0);
        assert_eq!(cost_norm("20000.00".parse().unwrap(), cap), 1.0);
        // ln(100) / ln(10000) is exactly 0.5
        let mid = cost_norm("99.00".parse().unwrap(), cap);
        assert!((mid - 0.5).abs() < 1e-12, "got {mid}");
    }

    #[test]
    fn delivery_score_clamps_overrun() {
        assert_eq!(delivery_score(5, 5), 1.0);
        assert_eq!(delivery_score(5, 3), 1.0);
        assert!((delivery_score(10, 15) - 0.5).abs() < 1e-12);
        assert_eq!(delivery_score(5, 10), 0.0);
        assert_eq!(delivery_score(5, 50), 0.0);
    }

    #[test]
    fn scope_match_is_case_insensitive_and_open_by_default() {
        assert_eq!(scope_match("electronics", &QueryContext::scoped("Electronics")), 1.0);
        assert_eq!(scope_match("electronics", &QueryContext::scoped("books")), 0.0);
        assert_eq!(scope_match("electronics", &QueryContext::any()), 1.0);
    }

    #[test]
    fn composite_weight_matches_hand_computation() {
        // 0.5 * 0.5 + 0.2 * 1.0 + 0.3 * 1.0 = 0.75
        let w = ContextWeights {
            w_cost: 0.5,
            w_scope: 0.2,
            w_delivery: 0.3,
            cost_cap: "9999.00".parse().unwrap(),
        };
        let got = context_weight(&tx("99.00", "electronics", 5, 5), &QueryContext::any(), &w);
        assert!((got - 0.75).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn validate_rejects_broken_weightings() {
        let w = ContextWeights { w_cost: 0.9, ..Default::default() };
        assert!(w.validate().is_err());
        let w = ContextWeights { cost_cap: Cost::ZERO, ..Default::default() };
        assert!(w.validate().is_err());
        assert!(ContextWeights::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn weight_stays_in_unit_interval(
            cents in 0u64..5_000_000,
            promised in 1u32..60,
            actual in 0u32..200,
            scoped in proptest::bool::ANY,
        ) {
            let w = ContextWeights::default();
            let record = tx("1.00", "general", promised, actual);
            let record = TransactionRecord { cost: Cost::from_minor_units(cents), ..record };
            let query = if scoped { QueryContext::scoped("general") } else { QueryContext::any() };
            let got = context_weight(&record, &query, &w);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&got), "weight {got} out of range");
        }

        // More expensive transactions never weigh less, all else equal.
        #[test]
        fn weight_is_monotone_in_cost(a in 0u64..2_000_000, b in 0u64..2_000_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let w = ContextWeights::default();
            let cheap = tx("0.00", "general", 5, 5);
            let lo_w = context_weight(
                &TransactionRecord { cost: Cost::from_minor_units(lo), ..cheap.clone() },
                &QueryContext::any(),
                &w,
            );
            let hi_w = context_weight(
                &TransactionRecord { cost: Cost::from_minor_units(hi), ..cheap },
                &QueryContext::any(),
                &w,
            );
            prop_assert!(lo_w <= hi_w + 1e-12);
        }
    }
}
