//! Building stars, mapping them and querying ranges.
//!
//! cargo run --example star_algebra

use ndarray::array;
use seqstar::Star;

fn main() -> seqstar::Result<()> {
    // the square [0, 1] × [0, 2]
    let square = Star::from_box(&[0.0, 0.0], &[1.0, 2.0])?;
    println!("square: dim {}, {} predicate variables", square.dim(), square.num_vars());

    // rotate by 45° and shift
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rotated = square.affine_map(&array![[r, -r], [r, r]], &array![1.0, 0.0])?;
    let bounds = rotated.range_of(None)?;
    println!("rotated bounds: {:?} .. {:?}", bounds.lower, bounds.upper);

    // x − x is a point when both summands share their variables
    let diff = square.shared_variable_sum(&square.linear_map(&array![[-1.0, 0.0], [0.0, -1.0]])?)?;
    println!("shared difference range: {:?}", diff.range_of(None)?);

    // independent summands grow the predicate
    let sum = square.minkowski_sum(&Star::from_box(&[-1.0, -1.0], &[1.0, 1.0])?)?;
    println!("minkowski sum: {} variables, range {:?}", sum.num_vars(), sum.range_of(None)?);

    for p in [[0.5, 1.0], [2.5, 0.0]] {
        println!("square contains {p:?}: {}", square.contains_point(&p, 1e-9));
    }
    Ok(())
}
