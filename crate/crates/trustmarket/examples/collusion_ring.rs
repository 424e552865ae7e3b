//! A mutual-praise ring versus credibility weighting.
//!
//! Ring members trade cheap items among themselves every tick and rate each
//! other 1.0, trying to pump one seller's reputation. Credibility weighting
//! discounts a recommendation by how the community rates the recommender,
//! so shills who also scam real buyers lose their voice. The A/B run below
//! evaluates the exact same event log twice: once with credibility
//! weighting on, once with every rater forced to full credibility.
//!
//! Run with: cargo run --example collusion_ring

use trustmarket::sim::{self, AgentProfile, Attack, Role, ScenarioConfig, SellerSelection, VariantSpec};
use trustmarket::{EngineParams, IntegrationParams};

fn main() {
    let config = ScenarioConfig {
        seed: 42,
        ticks: 200,
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
                count: 6,
                honesty: 0.95,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
        ],
        attack: Attack::Collusion { ring_size: 3 },
        engine: EngineParams::standard(),
        cost_min: "5.00".parse().unwrap(),
        cost_max: "500.00".parse().unwrap(),
        seller_selection: SellerSelection::Uniform,
    };

    let full_credibility = IntegrationParams {
        credibility_weighting: false,
        ..config.engine.integration.clone()
    };
    let comparison = sim::compare_runs(
        &config,
        &[
            VariantSpec { name: "weighted".into(), integration: None, context: None, cache: None },
            VariantSpec {
                name: "unweighted".into(),
                integration: Some(full_credibility),
                context: None,
                cache: None,
            },
        ],
    )
    .unwrap();

    println!("final mean opinion per class (observer's view):\n");
    println!("{:<18} {:>12} {:>12}", "class", "weighted", "unweighted");
    let weighted = comparison.report("weighted").unwrap();
    let unweighted = comparison.report("unweighted").unwrap();
    for (class, stat) in &weighted.final_per_class {
        println!(
            "{:<18} {:>12.4} {:>12.4}",
            class,
            stat.mean,
            unweighted.final_per_class[class].mean
        );
    }
    println!();
    println!(
        "honest-vs-adversarial separation: {:.4} weighted, {:.4} unweighted",
        weighted.separation.unwrap(),
        unweighted.separation.unwrap()
    );
    println!();
    println!("the ring's praise costs it real sales: shills sell junk to honest");
    println!("buyers too, their incoming ratings crater, and with credibility");
    println!("weighting their 1.0s barely move the colluding seller.");
}
