//! Event sourcing as an audit trail: replay the log, get the state back.
//!
//! The repository's only write operation is appending a validated event, so
//! the log is the whole truth. Anyone holding it can rebuild the derived
//! state byte for byte and detect tampering, truncation or reordering.
//!
//! Run with: cargo run --example replay_audit

use trustmarket::{credential_set, CredentialSet, EngineParams, Repository, TrustEngine};

fn person(tag: &str) -> CredentialSet {
    credential_set([
        ("email", &format!("{tag}@example.com"), true),
        ("payment", &format!("card-{tag}"), true),
        ("gov_id", &format!("ID-{tag}"), true),
    ])
}

fn main() {
    // Build a little history through the engine.
    let mut engine = TrustEngine::new(EngineParams::standard()).unwrap();
    let a = engine.register_as("ana", "standard", &person("ana")).unwrap().principal;
    let b = engine.register_as("bo", "standard", &person("bo")).unwrap().principal;
    engine.set_tick(1);
    let t1 = engine.record_transaction(&a, &b, "35.00".parse().unwrap(), "books", 4, 4).unwrap();
    engine.rate_after_transaction(&a, &b, &t1.tx_id, 0.9).unwrap();
    engine.set_tick(2);
    let t2 = engine.record_transaction(&b, &a, "210.00".parse().unwrap(), "camera", 7, 9).unwrap();
    engine.rate_after_transaction(&b, &a, &t2.tx_id, 0.8).unwrap();
    engine.rate_after_transaction(&a, &b, &t2.tx_id, 0.6).unwrap();

    let log = Repository::events_to_jsonl(engine.repo().events());
    let state = engine.repo().export_state_canonical();
    println!("the log, one event per line:\n");
    for line in log.lines() {
        let short = if line.len() > 96 { format!("{}...", &line[..93]) } else { line.to_string() };
        println!("  {short}");
    }
    println!("\nstate export: {} bytes, version {}", state.len(), engine.repo().version());

    // An auditor replays the log from scratch and compares.
    let events = Repository::events_from_jsonl(&log).unwrap();
    let rebuilt = Repository::replay(events).unwrap();
    assert_eq!(rebuilt.export_state_canonical(), state);
    println!("replayed {} events -> byte-identical state export", rebuilt.version());

    // Tampering attempts the replay catches.
    println!("\ntampering:");
    let reordered: Vec<&str> = {
        let mut lines: Vec<&str> = log.lines().collect();
        lines.swap(2, 3);
        lines
    };
    let err = Repository::events_from_jsonl(&reordered.join("\n"))
        .and_then(Repository::replay)
        .unwrap_err();
    println!("  swapped two events:   {err}");

    let truncated: String = log.lines().skip(1).collect::<Vec<_>>().join("\n");
    let err = Repository::events_from_jsonl(&truncated)
        .and_then(Repository::replay)
        .unwrap_err();
    println!("  dropped the first:    {err}");

    let mut edited = log.replace("\"value\":0.6", "\"value\":1.0");
    edited.push_str("junk that is not an event\n");
    let err = Repository::events_from_jsonl(&edited).unwrap_err();
    println!("  appended garbage:     {err}");
}
