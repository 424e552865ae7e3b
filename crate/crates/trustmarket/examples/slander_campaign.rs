//! Smear campaigns against the transaction-bound rating rule.
//!
//! Ratings here are not free-floating: each one must name a recorded
//! transaction, and only the two parties of that transaction may rate each
//! other over it. A mob that never bought anything from the target simply
//! has no standing, and each attacker who does buy gets exactly one voice
//! (latest rating only), paid for at the going price.
//!
//! Run with: cargo run --example slander_campaign

use trustmarket::sim::{self, AgentProfile, Attack, Role, ScenarioConfig, SellerSelection};
use trustmarket::{credential_set, EngineParams, TrustEngine, TxId};

fn main() {
    // The direct form of the guard, engine level.
    let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
    let creds = |t: &str| {
        credential_set([
            ("email", &format!("{t}@example.com"), true),
            ("payment", &format!("card-{t}"), true),
            ("gov_id", &format!("ID-{t}"), true),
        ])
    };
    let target = engine.register_as("target", "standard", &creds("target")).unwrap().principal;
    let customer = engine.register_as("customer", "standard", &creds("cust")).unwrap().principal;
    let troll = engine.register_as("troll", "standard", &creds("troll")).unwrap().principal;
    let tx = engine
        .record_transaction(&customer, &target, "40.00".parse().unwrap(), "general", 5, 5)
        .unwrap();

    let err = engine.rate_after_transaction(&troll, &target, &tx.tx_id, 0.0).unwrap_err();
    println!("troll rates over someone else's transaction: {err}");
    let err = engine
        .rate_after_transaction(&troll, &target, &TxId::new("t999"), 0.0)
        .unwrap_err();
    println!("troll rates over an invented transaction:    {err}");
    println!("version unchanged at {}: rejected writes leave no trace\n", engine.repo().version());

    // The same campaign at market scale. Ten slanderers hammer one honest
    // seller with zero-ratings; the engine turns away every attempt that
    // lacks a transaction, and what the attackers do buy, they must pay for.
    let config = ScenarioConfig {
        seed: 9,
        ticks: 150,
        agents: vec![
            AgentProfile {
                name: "buyer".into(),
                role: Role::Buyer,
                count: 12,
                honesty: 1.0,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
            AgentProfile {
                name: "honest_seller".into(),
                role: Role::Seller,
                count: 5,
                honesty: 0.95,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
        ],
        attack: Attack::Slander { attacker_count: 10, target: "honest_seller".into() },
        engine: EngineParams::standard(),
        cost_min: "5.00".parse().unwrap(),
        cost_max: "500.00".parse().unwrap(),
        seller_selection: SellerSelection::Uniform,
    };
    let (_, metrics) = sim::run_scenario(&config).unwrap();

    println!("simulated smear campaign against one of the honest sellers:");
    println!("  rejected rating attempts without standing: {}", metrics.guard_rejections);
    for (class, stat) in &metrics.final_per_class {
        println!("  final mean opinion of {:<14} {:.4}", class, stat.mean);
    }
    println!();
    println!("the slandered seller's standing dips only as far as genuinely");
    println!("purchased (and low-credibility) ratings can push it.");
}
