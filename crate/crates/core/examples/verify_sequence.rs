//! Local robustness of one sequence at increasing noise levels.
//!
//! cargo run --example verify_sequence

use seqstar::network::{load_dataset, load_model};
use seqstar::perturbation::{PerturbationKind, PerturbationSpec};
use seqstar::verifier::{check_local_robustness, VerifyOptions};

const MODEL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/noise_lstm_tiny.json");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/noise_lstm_tiny_test.jsonl");

fn main() -> seqstar::Result<()> {
    let net = load_model(MODEL)?;
    let seq = &load_dataset(DATA)?[2];
    let options = VerifyOptions::default();
    for eps in [10.0, 50.0, 90.0] {
        let spec = PerturbationSpec::new(PerturbationKind::Mfai, eps)?;
        let v = check_local_robustness(&net, seq, &spec, &options, 2)?;
        println!(
            "ε = {eps}%: {:?} (target {}, lower {:.3?}, upper {:.3?})",
            v.outcome, net.labels[v.target], v.lower, v.upper
        );
        if let Some(cex) = &v.counterexample {
            println!("  counterexample:\n{}", cex.values);
        }
    }
    Ok(())
}
