//! McCormick relaxation of an elementwise product and a sampled check of
//! its soundness.
//!
//! cargo run --example hadamard

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqstar::Star;

fn main() -> seqstar::Result<()> {
    let x = Star::from_box(&[-1.0, 0.5], &[2.0, 1.5])?;
    let y = Star::from_box(&[0.0, -3.0], &[1.0, -1.0])?;
    let (bx, by) = (x.range_of(None)?, y.range_of(None)?);
    let z = x.hadamard_product(&y, &bx, &by)?;
    println!("x ⊙ y: {} variables, {} constraints", z.num_vars(), z.predicate().num_rows());
    println!("range {:?}", z.range_of(None)?);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut misses = 0;
    for _ in 0..2000 {
        let a = x.sample(&mut rng, 1).expect("box sample");
        let b = y.sample(&mut rng, 1).expect("box sample");
        let p = &a * &b;
        if !z.contains_point(p.as_slice().unwrap(), 1e-7) {
            misses += 1;
        }
    }
    println!("sampled products outside the relaxation: {misses}");

    // a constant operand is multiplied out exactly
    let scale = Star::point(&[2.0, -1.0]);
    let exact = x.hadamard_product(&scale, &bx, &scale.range_of(None)?)?;
    println!("x ⊙ (2, −1): {} variables, range {:?}", exact.num_vars(), exact.range_of(None)?);
    Ok(())
}
