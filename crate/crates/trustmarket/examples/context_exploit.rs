//! Farming reputation with trinkets, cashing it in on big-ticket fraud.
//!
//! The exploiting seller fulfills every cheap order flawlessly and defrauds
//! every fourth, expensive one. Under a context-blind aggregator the many
//! cheap 1.0s swamp the rare 0.0s. Cost weighting flips the calculus: a
//! rating's weight grows with the money at stake, so the expensive failures
//! punch far above their count.
//!
//! Run with: cargo run --example context_exploit

use trustmarket::sim::{self, AgentProfile, Attack, Role, ScenarioConfig, SellerSelection, VariantSpec};
use trustmarket::{ContextWeights, EngineParams};

fn main() {
    let config = ScenarioConfig {
        seed: 42,
        ticks: 300,
        agents: vec![
            AgentProfile {
                name: "buyer".into(),
                role: Role::Buyer,
                count: 16,
                honesty: 1.0,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
            AgentProfile {
                name: "honest_seller".into(),
                role: Role::Seller,
                count: 7,
                honesty: 0.95,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
        ],
        // The simulator injects one "exploit_seller" with this playbook.
        attack: Attack::ContextExploit {
            cheap_cost: "5.00".parse().unwrap(),
            expensive_cost: "2000.00".parse().unwrap(),
            expensive_every: 4,
        },
        engine: EngineParams::standard(),
        cost_min: "5.00".parse().unwrap(),
        cost_max: "500.00".parse().unwrap(),
        seller_selection: SellerSelection::Uniform,
    };

    // Same scripted market, two aggregator configurations.
    let cost_blind = ContextWeights {
        w_cost: 0.0,
        w_scope: 0.4,
        w_delivery: 0.6,
        cost_cap: ContextWeights::default().cost_cap,
    };
    let comparison = sim::compare_runs(
        &config,
        &[
            VariantSpec { name: "cost_weighted".into(), integration: None, context: None, cache: None },
            VariantSpec {
                name: "cost_blind".into(),
                integration: None,
                context: Some(cost_blind),
                cache: None,
            },
        ],
    )
    .unwrap();

    let weighted = comparison.report("cost_weighted").unwrap();
    let blind = comparison.report("cost_blind").unwrap();
    println!("final mean opinion (observer's view):\n");
    println!("{:<16} {:>14} {:>12}", "class", "cost_weighted", "cost_blind");
    for (class, stat) in &weighted.final_per_class {
        println!(
            "{:<16} {:>14.4} {:>12.4}",
            class,
            stat.mean,
            blind.final_per_class[class].mean
        );
    }

    let gap_weighted =
        weighted.final_per_class["honest_seller"].mean - weighted.final_per_class["exploit_seller"].mean;
    let gap_blind =
        blind.final_per_class["honest_seller"].mean - blind.final_per_class["exploit_seller"].mean;
    println!();
    println!("honest-over-exploit margin: {gap_weighted:.4} cost-weighted, {gap_blind:.4} blind");
}
