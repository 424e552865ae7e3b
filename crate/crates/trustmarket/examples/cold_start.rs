//! Opinions about a subject nobody has rated yet.
//!
//! With no direct experience and no recommendations, the opinion falls back
//! to the verification score alone, passed through without any arithmetic.
//! Below the configured floor there is no opinion at all.
//!
//! Run with: cargo run --example cold_start

use trustmarket::{
    credential_set, Component, ComputeMode, EngineParams, QueryContext, TrustEngine,
};

fn main() {
    let params = EngineParams::standard();
    println!(
        "verification floor: {}\n",
        params.integration.min_verification
    );
    let mut engine = TrustEngine::new(params).unwrap();

    let viewer = engine
        .register(
            "standard",
            &credential_set([
                ("email", "v@example.com", true),
                ("payment", "visa-1", true),
                ("gov_id", "V-1", true),
            ]),
        )
        .unwrap()
        .principal;

    for (label, email, payment, gov) in [
        ("everything verified", true, true, true),
        ("email + gov_id", true, false, true),
        ("payment only", false, true, false),
        ("email only", true, false, false),
        ("nothing verified", false, false, false),
    ] {
        let outcome = engine
            .register(
                "standard",
                &credential_set([
                    ("email", label, email),
                    ("payment", label, payment),
                    ("gov_id", label, gov),
                ]),
            )
            .unwrap();
        let score = outcome.verification.score;
        match engine.opinion(&viewer, &outcome.principal, &QueryContext::any(), ComputeMode::Dtc) {
            Ok(opinion) => {
                // Exact passthrough, not approximately equal.
                assert_eq!(opinion.score.to_bits(), score.to_bits());
                assert_eq!(opinion.components_used, vec![Component::Verification]);
                println!(
                    "{label:<22} verification {score:.2}  ->  opinion {:.2} (components {:?})",
                    opinion.score, opinion.components_used
                );
            }
            Err(err) => {
                println!("{label:<22} verification {score:.2}  ->  refused: {err}");
            }
        }
    }
}
