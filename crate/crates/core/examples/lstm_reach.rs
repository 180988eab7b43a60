//! Reachable hidden states of an LSTM layer under an all-feature box.
//!
//! cargo run --example lstm_reach

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqstar::activation::SmoothRelaxation;
use seqstar::layer::{lstm_reach, LayerSpec};
use seqstar::network::{load_dataset, load_model};
use seqstar::perturbation::{build_star, PerturbationKind, PerturbationSpec};

const MODEL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/noise_lstm_tiny.json");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/noise_lstm_tiny_test.jsonl");

fn main() -> seqstar::Result<()> {
    let net = load_model(MODEL)?;
    let LayerSpec::Lstm(lstm) = &net.layers()[0] else {
        unreachable!("fixture starts with an LSTM layer")
    };
    let seq = &load_dataset(DATA)?[0];
    let spec = PerturbationSpec::new(PerturbationKind::Mfai, 20.0)?;
    let input = build_star(seq, &spec)?;
    println!("input: {} steps, {} variables", input.steps(), input.star().num_vars());

    for mode in [SmoothRelaxation::Interval, SmoothRelaxation::Secant] {
        let out = lstm_reach(&input, lstm, mode)?;
        let r = out.star().range_of(None)?;
        println!("{mode:?}: {} variables", out.star().num_vars());
        for k in 0..r.len() {
            println!("  h[{k}] ∈ [{:.4}, {:.4}]", r.lower[k], r.upper[k]);
        }
    }

    // concrete runs from sampled inputs stay inside the reachable set
    let out = lstm_reach(&input, lstm, SmoothRelaxation::Interval)?;
    let r = out.star().range_of(None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut inside = 0;
    for _ in 0..500 {
        let x = input.star().sample(&mut rng, 1).expect("box sample");
        let h = net.layers()[0].forward(&input.unstack(&x))?;
        let last: Vec<f64> = h.column(h.ncols() - 1).to_vec();
        inside += r.contains(&last, 1e-9) as usize;
    }
    println!("sampled final states inside the bounds: {inside}/500");
    Ok(())
}
