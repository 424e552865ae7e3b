//! A small two-sided market: transactions, cross ratings and what goes into
//! an opinion.
//!
//! Run with: cargo run --example marketplace_basics

use trustmarket::{
    credential_set, ComputeMode, CredentialSet, EngineParams, PrincipalId, QueryContext,
    TrustEngine,
};

fn person(tag: &str) -> CredentialSet {
    credential_set([
        ("email", &format!("{tag}@example.com"), true),
        ("payment", &format!("card-{tag}"), true),
        ("gov_id", &format!("ID-{tag}"), true),
    ])
}

fn main() {
    let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
    let alice = engine.register_as("alice", "standard", &person("alice")).unwrap().principal;
    let bob = engine.register_as("bob", "standard", &person("bob")).unwrap().principal;
    let carol = engine.register_as("carol", "standard", &person("carol")).unwrap().principal;
    let dave = engine.register_as("dave", "standard", &person("dave")).unwrap().principal;

    println!("== trading");
    engine.set_tick(1);
    let t1 = engine
        .record_transaction(&alice, &bob, "120.00".parse().unwrap(), "electronics", 5, 4)
        .unwrap();
    println!("alice buys from bob for 120.00 ({})", t1.tx_id);
    engine.rate_after_transaction(&alice, &bob, &t1.tx_id, 0.9).unwrap();
    engine.rate_after_transaction(&bob, &alice, &t1.tx_id, 1.0).unwrap();
    println!("both sides rate: alice -> bob 0.9, bob -> alice 1.0");

    engine.set_tick(2);
    let t2 = engine
        .record_transaction(&carol, &bob, "60.00".parse().unwrap(), "books", 5, 5)
        .unwrap();
    engine.rate_after_transaction(&carol, &bob, &t2.tx_id, 0.7).unwrap();
    println!("carol buys from bob and rates 0.7\n");

    // Dave has never dealt with bob; his opinion blends verification with
    // what alice and carol report, each weighted by credibility and by the
    // context of the underlying transaction.
    println!("== dave's opinion about bob");
    let opinion = engine.opinion(&dave, &bob, &QueryContext::any(), ComputeMode::Dtc).unwrap();
    print_opinion(&opinion);

    // Alice has her own experience, so the direct component joins in and
    // her recommendation pool shrinks: her own rating is excluded from it.
    println!("== alice's opinion about bob");
    let opinion = engine.opinion(&alice, &bob, &QueryContext::any(), ComputeMode::Dtc).unwrap();
    print_opinion(&opinion);

    // Ratings overwrite, they never average. Alice revises after a dispute.
    println!("== alice revises her rating to 0.2");
    engine.set_tick(3);
    engine.rate_after_transaction(&alice, &bob, &t1.tx_id, 0.2).unwrap();
    let opinion = engine.opinion(&alice, &bob, &QueryContext::any(), ComputeMode::Dtc).unwrap();
    print_opinion(&opinion);

    // Guard rails.
    println!("== guard rails");
    let err = engine
        .rate_after_transaction(&dave, &bob, &t1.tx_id, 1.0)
        .unwrap_err();
    println!("dave rating a deal he was not part of: {err}");
    let err = engine
        .opinion(&bob, &bob, &QueryContext::any(), ComputeMode::Dtc)
        .unwrap_err();
    println!("bob asking about himself:              {err}");
    let err = engine
        .record_transaction(&PrincipalId::new("mallory"), &bob, "1.00".parse().unwrap(), "x", 1, 1)
        .unwrap_err();
    println!("unregistered buyer:                    {err}");
}

fn print_opinion(opinion: &trustmarket::TrustOpinion) {
    println!("  score        {:.4}", opinion.score);
    println!("  verification {:.4}", opinion.verification);
    match opinion.direct.value() {
        Some(v) => println!("  direct       {:.4} (support {})", v, opinion.direct.support),
        None => println!("  direct       absent"),
    }
    match opinion.recommended.value() {
        Some(v) => println!("  recommended  {:.4} (support {})", v, opinion.recommended.support),
        None => println!("  recommended  absent"),
    }
    println!("  components   {:?}", opinion.components_used);
    println!("  repo version {}\n", opinion.repo_version);
}
