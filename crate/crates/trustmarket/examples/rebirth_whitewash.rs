//! Why abandoning a bad account and re-registering does not work here.
//!
//! Strong credentials (the tier's `strong` list, here `gov_id`) are hashed
//! into an identity fingerprint at registration. A returning fraudster who
//! must present the same government id lands on the same reputation record,
//! ratings and all. Only a genuinely new strong identity starts clean, and
//! then it starts at the cold-start verification score, not at a blank
//! slate of unearned goodwill.
//!
//! Run with: cargo run --example rebirth_whitewash

use trustmarket::sim::{self, AgentProfile, Attack, Role, ScenarioConfig, SellerSelection};
use trustmarket::{
    credential_set, ComputeMode, CredentialSet, EngineParams, QueryContext, TrustEngine,
};

fn with_gov_id(tag: &str, gov_id: &str) -> CredentialSet {
    credential_set([
        ("email", format!("{tag}@example.com"), true),
        ("payment", format!("card-{tag}"), true),
        ("gov_id", gov_id.to_string(), true),
    ])
}

fn main() {
    println!("=== engine level ===");
    let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
    let fraud = engine
        .register_as("shady_shop", "standard", &with_gov_id("shady", "GOV-555"))
        .unwrap();
    println!("shady_shop registers, fingerprint {}", fraud.verification.fingerprint.unwrap());
    let fraud = fraud.principal;

    let mut victims = Vec::new();
    engine.set_tick(1);
    for i in 0..4 {
        let v = engine
            .register_as(
                format!("buyer{i}").as_str(),
                "standard",
                &with_gov_id(&format!("buyer{i}"), &format!("GOV-{i}")),
            )
            .unwrap()
            .principal;
        let tx = engine
            .record_transaction(&v, &fraud, "90.00".parse().unwrap(), "general", 5, 12)
            .unwrap();
        engine.rate_after_transaction(&v, &fraud, &tx.tx_id, 0.1).unwrap();
        victims.push(v);
    }
    let before = engine
        .opinion(&victims[3], &fraud, &QueryContext::any(), ComputeMode::Dtc)
        .unwrap();
    println!("reputation after four burned buyers: {:.4}", before.score);

    // The re-registration attempt: new account name, same government id.
    engine.set_tick(2);
    let rebirth = engine
        .register_as("totally_new_shop", "standard", &with_gov_id("new", "GOV-555"))
        .unwrap();
    println!(
        "\n'totally_new_shop' presents the same gov_id -> linked to {}",
        rebirth.linked_to.as_ref().unwrap()
    );
    let after = engine
        .opinion(&victims[3], &rebirth.principal, &QueryContext::any(), ComputeMode::Dtc)
        .unwrap();
    println!("opinion about the 'new' shop: {:.4} (identical, history carried over)", after.score);
    assert_eq!(before.score.to_bits(), after.score.to_bits());

    // An honestly new market entrant is unaffected: different gov_id, no
    // link, and the opinion is exactly the verification score.
    let honest = engine
        .register_as("actually_new_shop", "standard", &with_gov_id("fresh", "GOV-777"))
        .unwrap();
    assert_eq!(honest.linked_to, None);
    let cold = engine
        .opinion(&victims[3], &honest.principal, &QueryContext::any(), ComputeMode::Dtc)
        .unwrap();
    println!("a genuinely new shop starts at its verification score: {:.4}", cold.score);

    println!("\n=== full simulation ===");
    for fresh_identity in [false, true] {
        let config = ScenarioConfig {
            seed: 11,
            ticks: 80,
            agents: vec![
                AgentProfile {
                    name: "buyer".into(),
                    role: Role::Buyer,
                    count: 10,
                    honesty: 1.0,
                    tier: None,
                    verified_attrs: None,
                    adversarial: false,
                },
                AgentProfile {
                    name: "honest_seller".into(),
                    role: Role::Seller,
                    count: 4,
                    honesty: 0.95,
                    tier: None,
                    verified_attrs: None,
                    adversarial: false,
                },
                AgentProfile {
                    name: "fraud".into(),
                    role: Role::Seller,
                    count: 1,
                    honesty: 0.1,
                    tier: None,
                    verified_attrs: None,
                    adversarial: true,
                },
            ],
            attack: Attack::Whitewash {
                fraud_seller: "fraud".into(),
                rebirth_tick: 50,
                fresh_identity,
            },
            engine: EngineParams::standard(),
            cost_min: "5.00".parse().unwrap(),
            cost_max: "500.00".parse().unwrap(),
            seller_selection: SellerSelection::Uniform,
        };
        let (_, metrics) = sim::run_scenario(&config).unwrap();
        let report = metrics.whitewash.unwrap();
        println!(
            "\nfraud seller re-registers at tick 50 with {} identity:",
            if fresh_identity { "a fresh strong" } else { "the same strong" }
        );
        println!("  observer's opinion before: {:.4}", report.pre_score);
        println!("  observer's opinion after:  {:.4}", report.post_score);
        if fresh_identity {
            println!(
                "  escaped: a brand new strong identity restarts at the newcomer"
            );
            println!(
                "  cold-start score {:.4}; the price of escape is procuring a fresh gov id",
                report.new_verification
            );
        } else {
            println!("  nothing gained: the fingerprint linked the accounts");
        }
    }
}
