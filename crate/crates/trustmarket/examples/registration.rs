//! Tier policies, graded verification and minimal disclosure.
//!
//! Run with: cargo run --example registration

use trustmarket::{credential_set, EngineParams, TrustEngine};

fn main() {
    let params = EngineParams::standard();
    let policy = params.tier("standard").unwrap().clone();
    println!("tier '{}' requires:", policy.tier);
    for attr in &policy.required {
        let strong = if policy.strong.contains(&attr.name) { "  (strong)" } else { "" };
        println!("  {:<12} weight {}{}", attr.name, attr.weight, strong);
    }
    println!();

    let mut engine = TrustEngine::new(params).unwrap();

    // Fully verified: score 1.0 and, because the strong attribute is among
    // the verified ones, an identity fingerprint.
    let full = engine
        .register(
            "standard",
            &credential_set([
                ("email", "ana@example.com", true),
                ("payment", "visa-4242", true),
                ("gov_id", "P-100200", true),
            ]),
        )
        .unwrap();
    println!("{} registered", full.principal);
    println!("  score       {}", full.verification.score);
    println!("  verified    {:?}", full.verification.verified_attrs);
    println!(
        "  fingerprint {}",
        full.verification.fingerprint.as_deref().unwrap_or("-")
    );
    println!();

    // Partially verified: the grade is the sum of the verified weights, and
    // no fingerprint because the strong attribute failed verification.
    let partial = engine
        .register(
            "standard",
            &credential_set([
                ("email", "ben@example.com", true),
                ("payment", "mc-5151", true),
                ("gov_id", "P-999999", false),
            ]),
        )
        .unwrap();
    println!("{} registered", partial.principal);
    println!("  score       {} (email 0.2 + payment 0.3)", partial.verification.score);
    println!(
        "  fingerprint {}",
        partial.verification.fingerprint.as_deref().unwrap_or("none: strong attr unverified")
    );
    println!();

    // Disclosing more than the tier asks for is refused outright. The
    // request never touches the log.
    let before = engine.repo().version();
    let nosy = engine.register(
        "standard",
        &credential_set([
            ("email", "eve@example.com", true),
            ("payment", "amex-0001", true),
            ("gov_id", "P-777", true),
            ("mothers_maiden_name", "smith", true),
            ("phone", "+1-555-0101", true),
        ]),
    );
    println!("over-disclosure: {}", nosy.unwrap_err());
    assert_eq!(engine.repo().version(), before, "nothing was recorded");

    let unknown = engine.register("platinum", &credential_set([("email", "x", true)]));
    println!("unknown tier:   {}", unknown.unwrap_err());
}
