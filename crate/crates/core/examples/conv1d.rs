//! A 1-D convolution is an affine map over the stacked sequence, so its
//! reachable set is exact.
//!
//! cargo run --example conv1d

use ndarray::{array, Array3};
use seqstar::layer::{conv1d_reach, Conv1d, LayerSpec, SequenceStar};
use seqstar::Star;

fn main() -> seqstar::Result<()> {
    // 1 input channel, 2 output channels, kernel 3, padding 1
    let mut weights = Array3::zeros((2, 1, 3));
    weights.assign(&array![[[1.0, 2.0, 1.0]], [[-1.0, 0.0, 1.0]]]);
    let conv = Conv1d {
        weights,
        bias: array![0.0, 0.5],
        stride: 1,
        padding: 1,
        dilation: 1,
    };
    let layer = LayerSpec::Conv1d(conv.clone());

    let x = array![[1.0, 2.0, 0.0, -1.0]];
    let y = layer.forward(&x)?;
    println!("forward:\n{y}");

    let point = SequenceStar::point(&x)?;
    let reached = conv1d_reach(&point, &conv)?;
    println!("point reach:\n{}", reached.unstack(reached.star().center()));

    // ±0.1 on every step
    let n = x.ncols();
    let boxed = Star::from_box(&vec![-0.1; n], &vec![0.1; n])?
        .affine_map(&ndarray::Array2::eye(n), &x.row(0).to_owned())?;
    let reached = conv1d_reach(&SequenceStar::new(boxed, 1, n)?, &conv)?;
    let r = reached.star().range_of(None)?;
    for t in 0..reached.steps() {
        for f in 0..reached.features() {
            let i = reached.index(f, t);
            println!("out[{f}, {t}] ∈ [{:.2}, {:.2}]", r.lower[i], r.upper[i]);
        }
    }
    Ok(())
}
