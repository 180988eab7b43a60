#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::Array1;
use rand::Rng;
use seqstar::layer::SequenceStar;
use seqstar::network::{load_dataset, load_model, NetworkSpec, SequenceTensor};

pub const FIXTURES: [&str; 3] = ["fc_toy", "noise_lstm_tiny", "vowel_cnn_lstm_tiny"];

pub fn fixture(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(file)
}

pub fn model(name: &str) -> NetworkSpec {
    load_model(fixture(&format!("{name}.json"))).expect("fixture model")
}

pub fn dataset(name: &str) -> Vec<SequenceTensor> {
    load_dataset(fixture(&format!("{name}_test.jsonl"))).expect("fixture dataset")
}

/// Point of a box-predicate input star: a random corner with probability
/// `corner_rate`, otherwise uniform.
pub fn sample_box_input<R: Rng>(input: &SequenceStar, rng: &mut R, corner_rate: f64) -> SequenceTensor {
    let star = input.star();
    let corner = rng.gen_bool(corner_rate);
    let alpha: Vec<f64> = star
        .alpha_lower()
        .iter()
        .zip(star.alpha_upper())
        .map(|(&lo, &hi)| {
            if corner {
                if rng.gen_bool(0.5) {
                    lo
                } else {
                    hi
                }
            } else {
                rng.gen_range(lo..=hi)
            }
        })
        .collect();
    let x: Array1<f64> = star.evaluate(&alpha).expect("alpha of matching length");
    SequenceTensor::new(input.unstack(&x), None).expect("finite sample")
}
