//! Cached (ATC) versus always-fresh (DTC) opinion computation.
//!
//! DTC recomputes from the repository on every query. ATC consults a cache
//! first and only recomputes when the cached entry is older than the
//! configured staleness budget, measured in repository events. With the
//! default budget of zero the two are observably identical; with a nonzero
//! budget ATC may serve slightly old answers until flushed.
//!
//! Run with: cargo run --example atc_vs_dtc

use trustmarket::reputation::{atc_opinion, dtc_opinion, AtcCache};
use trustmarket::{
    canonical_json, credential_set, ComputeMode, ContextWeights, EngineParams, QueryContext,
    TrustEngine,
};

fn main() {
    // Part 1: through the engine, budget 0. Byte-for-byte identical.
    let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
    let ids: Vec<_> = (0..3)
        .map(|i| {
            engine
                .register(
                    "standard",
                    &credential_set([
                        ("email", &format!("u{i}@example.com"), true),
                        ("payment", &format!("card-{i}"), true),
                        ("gov_id", &format!("ID-{i}"), true),
                    ]),
                )
                .unwrap()
                .principal
        })
        .collect();
    let tx = engine
        .record_transaction(&ids[0], &ids[1], "75.00".parse().unwrap(), "general", 5, 5)
        .unwrap();
    engine.rate_after_transaction(&ids[0], &ids[1], &tx.tx_id, 0.8).unwrap();

    let query = QueryContext::any();
    let atc = engine.opinion(&ids[2], &ids[1], &query, ComputeMode::Atc).unwrap();
    let dtc = engine.opinion(&ids[2], &ids[1], &query, ComputeMode::Dtc).unwrap();
    assert_eq!(canonical_json(&atc), canonical_json(&dtc));
    println!("staleness budget 0: cached and fresh opinions are identical");
    println!("  {}\n", canonical_json(&atc));

    // Part 2: the raw cache machinery, budget 3. We watch an entry go stale.
    let params = EngineParams::standard();
    let digest = params.digest();
    let weights = ContextWeights::default();
    let cache = AtcCache::new();
    let budget = 3;

    let repo = engine.repo().clone();
    let v0 = repo.version();
    let first = atc_opinion(
        &repo, &cache, &ids[2], &ids[1], &query, &params.integration, &weights, budget, &digest,
    )
    .unwrap();
    println!("cached at version {v0}: score {:.4} ({} entry)", first.score, cache.len());

    // Three more events: a new transaction and rating from the third user,
    // then a revision. The repository moves but stays within budget.
    let mut engine2 = TrustEngine::from_parts(repo, params.clone()).unwrap();
    engine2.set_tick(2);
    let t = engine2
        .record_transaction(&ids[2], &ids[1], "300.00".parse().unwrap(), "general", 5, 9)
        .unwrap();
    engine2.rate_after_transaction(&ids[2], &ids[1], &t.tx_id, 0.1).unwrap();
    engine2.rate_after_transaction(&ids[1], &ids[2], &t.tx_id, 0.9).unwrap();

    let repo = engine2.repo();
    let stale = atc_opinion(
        repo, &cache, &ids[0], &ids[1], &query, &params.integration, &weights, budget, &digest,
    );
    // Different viewer: a miss, computed fresh. The original entry survives.
    let _ = stale.unwrap();

    let served = atc_opinion(
        repo, &cache, &ids[2], &ids[1], &query, &params.integration, &weights, budget, &digest,
    )
    .unwrap();
    let fresh = dtc_opinion(repo, &ids[2], &ids[1], &query, &params.integration, &weights).unwrap();
    println!(
        "at version {} (3 events later, within budget):",
        repo.version()
    );
    println!("  ATC still serves the old answer: {:.4} (repo version {})", served.score, served.repo_version);
    println!("  DTC already sees the bad order:  {:.4} (repo version {})", fresh.score, fresh.repo_version);
    assert_eq!(served.repo_version, v0);
    assert!(fresh.score < served.score);

    cache.flush();
    let after_flush = atc_opinion(
        repo, &cache, &ids[2], &ids[1], &query, &params.integration, &weights, budget, &digest,
    )
    .unwrap();
    println!("after flush: ATC recomputes, {:.4} == DTC {:.4}", after_flush.score, fresh.score);
    assert_eq!(canonical_json(&after_flush), canonical_json(&fresh));
}
