//! A PR / sumRT sweep over a test set, written as CSV.
//!
//! cargo run --example campaign -- [model.json data.jsonl]

use seqstar::network::{load_dataset, load_model};
use seqstar::perturbation::PerturbationKind;
use seqstar::verifier::{run_campaign, CampaignPlan, VerifyOptions};

fn main() -> seqstar::Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let mut args = std::env::args().skip(1);
    let model = args.next().unwrap_or(format!("{fixtures}/fc_toy.json"));
    let data = args.next().unwrap_or(format!("{fixtures}/fc_toy_test.jsonl"));

    let net = load_model(&model)?;
    let dataset = load_dataset(&data)?;
    let plan = CampaignPlan::new(PerturbationKind::ALL.to_vec(), vec![50.0, 60.0, 70.0, 80.0, 90.0]);
    let report = run_campaign(&net, &dataset, &plan, &VerifyOptions::default(), 0)?;
    println!(
        "{}: {} of {} sequences correctly classified",
        report.model,
        report.sequences.len(),
        report.dataset_size
    );
    print!("{}", report.render_table());
    println!();
    print!("{}", report.to_csv());
    Ok(())
}
