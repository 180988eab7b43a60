//! The four perturbation supports on one sequence.
//!
//! cargo run --example perturbations

use ndarray::array;
use seqstar::network::SequenceTensor;
use seqstar::perturbation::{build_star, perturbed_cells, PerturbationKind, PerturbationSpec};

fn main() -> seqstar::Result<()> {
    let seq = SequenceTensor::new(array![[0.2, 0.4, 0.6], [-1.0, -2.0, -3.0]], None)?;
    for kind in PerturbationKind::ALL {
        let spec = PerturbationSpec::new(kind, 50.0)?.with_feature(1).with_instance(2);
        let cells = perturbed_cells(&seq, &spec)?;
        let star = build_star(&seq, &spec)?;
        println!("{kind}: {} variables", star.star().num_vars());
        for c in cells {
            println!("  feature {} step {}: ±{:.3}", c.feature, c.step, c.delta);
        }
    }
    Ok(())
}
