//! ReLU splitting versus the triangle relaxation, and the two sigmoid/tanh
//! relaxations.
//!
//! cargo run --example activations

use ndarray::array;
use seqstar::activation::{relu_reach, sigmoid_reach, tanh_reach, ReluMode, SmoothRelaxation};
use seqstar::Star;

fn main() -> seqstar::Result<()> {
    let input = Star::from_box(&[-1.0, -1.0], &[1.0, 1.0])?
        .affine_map(&array![[1.0, 1.0], [1.0, -1.0]], &array![0.0, 0.5])?;

    let exact = relu_reach(&input, ReluMode::ExactSplit, 64)?;
    println!("exact ReLU: {} stars, envelope {:?}", exact.len(), exact.range()?);
    let approx = relu_reach(&input, ReluMode::Approx, 0)?;
    println!(
        "triangle ReLU: {} star, {} variables, envelope {:?}",
        approx.len(),
        approx.members()[0].num_vars(),
        approx.range()?
    );

    let negative = Star::from_box(&[-4.0], &[-1.0])?;
    for mode in [SmoothRelaxation::Interval, SmoothRelaxation::Secant] {
        let s = sigmoid_reach(&negative, mode)?;
        let t = tanh_reach(&negative, mode)?;
        println!(
            "{mode:?}: sigmoid rows {}, tanh range {:?}",
            s.predicate().num_rows(),
            t.range_of(None)?
        );
    }
    Ok(())
}
