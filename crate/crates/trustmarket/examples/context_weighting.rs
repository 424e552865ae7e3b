//! How transaction context (cost, scope, delivery) shapes recommendations.
//!
//! A rating earned on a 5.00 trinket should not carry the weight of one
//! earned on a 2000.00 laptop, and a rating about books says little about
//! electronics. Every rating is therefore weighted by the transaction it
//! came from before it enters the recommendation pool.
//!
//! Run with: cargo run --example context_weighting

use trustmarket::context::{cost_norm, delivery_score};
use trustmarket::reputation::recommended_trust;
use trustmarket::{
    credential_set, ContextWeights, Cost, CredentialSet, EngineParams, QueryContext, TrustEngine,
};

fn person(tag: &str) -> CredentialSet {
    credential_set([
        ("email", &format!("{tag}@example.com"), true),
        ("payment", &format!("card-{tag}"), true),
        ("gov_id", &format!("ID-{tag}"), true),
    ])
}

fn main() {
    let weights = ContextWeights::default();
    println!(
        "weights: cost {} | scope {} | delivery {} (cap {})\n",
        weights.w_cost, weights.w_scope, weights.w_delivery, weights.cost_cap
    );

    // The cost factor grows logarithmically and saturates at the cap, so a
    // tenfold price difference matters much more at the low end.
    println!("cost -> normalized weight factor:");
    for cost in ["1.00", "10.00", "100.00", "1000.00", "10000.00", "50000.00"] {
        let c: Cost = cost.parse().unwrap();
        println!("  {:>9}  {:.3}", cost, cost_norm(c, weights.cost_cap));
    }
    println!();

    println!("delivery promised 5 days -> factor:");
    for actual in [3, 5, 7, 10, 15] {
        println!("  actual {:>2}  {:.2}", actual, delivery_score(5, actual));
    }
    println!();

    // One seller, two impressions: a glowing rating from a tiny book sale
    // and a damning one from an expensive electronics order.
    let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
    let viewer = engine.register_as("viewer", "standard", &person("viewer")).unwrap().principal;
    let shop = engine.register_as("shop", "standard", &person("shop")).unwrap().principal;
    let fan = engine.register_as("fan", "standard", &person("fan")).unwrap().principal;
    let victim = engine.register_as("victim", "standard", &person("victim")).unwrap().principal;

    engine.set_tick(1);
    let cheap = engine
        .record_transaction(&fan, &shop, "5.00".parse().unwrap(), "books", 5, 5)
        .unwrap();
    engine.rate_after_transaction(&fan, &shop, &cheap.tx_id, 1.0).unwrap();
    let pricey = engine
        .record_transaction(&victim, &shop, "1800.00".parse().unwrap(), "electronics", 5, 5)
        .unwrap();
    engine.rate_after_transaction(&victim, &shop, &pricey.tx_id, 0.0).unwrap();

    let repo = engine.repo();
    let any = recommended_trust(repo, &viewer, &shop, &QueryContext::any(), &weights, true)
        .unwrap()
        .value()
        .unwrap();
    println!("recommendation about the shop, cost-weighted:    {any:.3}");
    println!("  (the 1800.00 failure dominates the 5.00 praise)");

    let flat = ContextWeights { w_cost: 0.0, w_scope: 0.2, w_delivery: 0.8, ..weights };
    let blind = recommended_trust(repo, &viewer, &shop, &QueryContext::any(), &flat, true)
        .unwrap()
        .value()
        .unwrap();
    println!("same ratings with cost weighting off:            {blind:.3}");

    // Scoped queries grant the scope factor only to matching transactions;
    // the rest keep their cost and delivery factors but lose that share.
    let books = recommended_trust(
        repo, &viewer, &shop, &QueryContext::scoped("books"), &weights, true,
    )
    .unwrap()
    .value()
    .unwrap();
    let electronics = recommended_trust(
        repo, &viewer, &shop, &QueryContext::scoped("electronics"), &weights, true,
    )
    .unwrap()
    .value()
    .unwrap();
    println!("scoped to books:                                 {books:.3}");
    println!("scoped to electronics:                           {electronics:.3}");
}
