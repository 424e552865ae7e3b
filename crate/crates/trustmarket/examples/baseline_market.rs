//! The deterministic simulator end to end, no attack.
//!
//! One seed drives every draw: the same scenario file always produces the
//! same event log, the same state export and the same metrics, byte for
//! byte. An "observer" principal who never trades measures each class's
//! reputation every tick.
//!
//! Run with: cargo run --example baseline_market

use trustmarket::sim::{self, AgentProfile, Role, ScenarioConfig, SellerSelection};
use trustmarket::EngineParams;

fn main() {
    let config = ScenarioConfig {
        seed: 1234,
        ticks: 120,
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
                name: "reliable".into(),
                role: Role::Seller,
                count: 4,
                honesty: 0.97,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
            AgentProfile {
                name: "sloppy".into(),
                role: Role::Seller,
                count: 3,
                honesty: 0.6,
                tier: None,
                verified_attrs: None,
                adversarial: false,
            },
        ],
        attack: trustmarket::sim::Attack::None,
        engine: EngineParams::standard(),
        cost_min: "5.00".parse().unwrap(),
        cost_max: "500.00".parse().unwrap(),
        seller_selection: SellerSelection::TrustWeighted,
    };

    let (script, metrics) = sim::run_scenario(&config).unwrap();
    println!(
        "simulated {} ticks, {} events, {} principals on the roster\n",
        metrics.ticks,
        script.events.len(),
        script.roster.len()
    );

    println!("observer's mean opinion per class over time:");
    println!("{:>6} {:>10} {:>10} {:>10}", "tick", "buyer", "reliable", "sloppy");
    for checkpoint in [1, 5, 15, 40, 80, 120] {
        let row = |class: &str| {
            metrics
                .series
                .iter()
                .find(|r| r.tick == checkpoint && r.class == class)
                .map(|r| format!("{:>10.4}", r.mean))
                .unwrap_or_else(|| format!("{:>10}", "-"))
        };
        println!("{checkpoint:>6} {} {} {}", row("buyer"), row("reliable"), row("sloppy"));
    }
    println!();
    println!("final spread:");
    for (class, stat) in &metrics.final_per_class {
        println!(
            "  {:<10} mean {:.4}  min {:.4}  max {:.4}  ({} members)",
            class, stat.mean, stat.min, stat.max, stat.count
        );
    }

    // Determinism is a hard promise, not a tendency.
    let (script2, metrics2) = sim::run_scenario(&config).unwrap();
    assert_eq!(script.final_state, script2.final_state);
    assert_eq!(metrics.to_canonical_json(), metrics2.to_canonical_json());
    println!("\nsecond run with the same seed: byte-identical log, state and metrics");

    // The artifacts a CLI `simulate` run would write, in a scratch dir.
    let out = std::env::temp_dir().join("trustmarket-baseline-example");
    sim::write_outputs(&out, &script, &metrics).unwrap();
    println!("artifacts written to {}", out.display());
    for file in ["log.jsonl", "state.json", "metrics.json", "metrics.csv"] {
        let len = std::fs::metadata(out.join(file)).unwrap().len();
        println!("  {file:<12} {len} bytes");
    }
}
