//! Local robustness verdicts, falsification, and PR / sumRT campaigns.
//!
//! A sequence is *robust* when the lower output bound of its target class
//! dominates the upper bound of every other class (ties count as robust).
//! Over-approximate reachability can only prove robustness; a failed proof
//! is turned into *non-robust* only by a concrete counterexample from the
//! falsifier, and is *unknown* otherwise.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::ReluMode;
use crate::error::{Error, Result};
use crate::layer::ReachMode;
use crate::network::{max_id, NetworkSpec, SequenceTensor};
use crate::perturbation::{build_star, perturbed_cells, PerturbationKind, PerturbationSpec, PerturbedCell};
use crate::star::{IntervalBox, StarUnion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Robust,
    NonRobust,
    Unknown,
}

/// How output ranges of a multi-member union decide robustness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnionRule {
    /// Compare the coordinate-wise envelope over all members.
    Envelope,
    /// Require every member to separate the target on its own.
    PerMember,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    /// Wall-clock seconds per verdict.
    Wall,
    /// Runtimes recorded as zero, for reproducible report bytes.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    #[serde(skip)]
    pub mode: ReachMode,
    /// Samples the falsifier may draw per sequence.
    pub falsify_budget: usize,
    pub seed: u64,
    /// `None` picks per-member for exact ReLU splitting, envelope otherwise.
    pub union_rule: Option<UnionRule>,
    pub timing: Timing,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            mode: ReachMode::default(),
            falsify_budget: 1000,
            seed: 0,
            union_rule: None,
            timing: Timing::Wall,
        }
    }
}

impl VerifyOptions {
    fn rule(&self) -> UnionRule {
        self.union_rule.unwrap_or(match self.mode.relu {
            ReluMode::ExactSplit => UnionRule::PerMember,
            ReluMode::Approx => UnionRule::Envelope,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub sequence_id: usize,
    pub target: usize,
    pub outcome: Outcome,
    /// Binary robustness value: 1 for robust, else 0.
    pub rv: u8,
    /// Per-class reachable lower bounds (envelope over union members).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Perturbation radius per feature (absent features are unperturbed).
    pub deltas: Vec<Option<f64>>,
    pub members: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<SequenceTensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub runtime: f64,
}

/// `LB_target ≥ UB_k` for every `k ≠ target`.
pub fn separates(bounds: &IntervalBox, target: usize) -> bool {
    let lb = bounds.lower[target];
    bounds
        .upper
        .iter()
        .enumerate()
        .all(|(k, &ub)| k == target || lb >= ub)
}

fn decide(union: &StarUnion, target: usize, rule: UnionRule) -> Result<(bool, IntervalBox)> {
    let ranges = union
        .members()
        .iter()
        .map(|m| m.range_of(None))
        .collect::<Result<Vec<_>>>()?;
    let mut envelope = ranges[0].clone();
    for r in &ranges[1..] {
        envelope = envelope.hull(r)?;
    }
    let robust = match rule {
        UnionRule::Envelope => separates(&envelope, target),
        UnionRule::PerMember => ranges.iter().all(|r| separates(r, target)),
    };
    Ok((robust, envelope))
}

/// Local robustness of `net` at `seq` under `spec`.
///
/// The target class is `maxID(forward(seq))`; callers are expected to pass
/// correctly classified sequences.
pub fn check_local_robustness(
    net: &NetworkSpec,
    seq: &SequenceTensor,
    spec: &PerturbationSpec,
    options: &VerifyOptions,
    sequence_id: usize,
) -> Result<Verdict> {
    let started = Instant::now();
    let target = max_id(&net.forward(seq)?);
    let cells = perturbed_cells(seq, spec)?;
    let mut deltas = vec![None; seq.features()];
    for c in &cells {
        deltas[c.feature] = Some(c.delta);
    }

    let mut verdict = Verdict {
        sequence_id,
        target,
        outcome: Outcome::Unknown,
        rv: 0,
        lower: Vec::new(),
        upper: Vec::new(),
        deltas,
        members: 0,
        counterexample: None,
        reason: None,
        runtime: 0.0,
    };

    let reached = build_star(seq, spec)
        .and_then(|input| net.reach(&input, &options.mode))
        .and_then(|union| {
            let members = union.len();
            decide(&union, target, options.rule()).map(|(robust, env)| (robust, env, members))
        });
    match reached {
        Ok((robust, envelope, members)) => {
            verdict.lower = envelope.lower;
            verdict.upper = envelope.upper;
            verdict.members = members;
            if robust {
                verdict.outcome = Outcome::Robust;
                verdict.rv = 1;
            }
        }
        Err(e @ Error::UnsupportedMode(_)) => return Err(e),
        Err(e) => verdict.reason = Some(e.to_string()),
    }

    if verdict.outcome != Outcome::Robust {
        let seed = task_seed(options.seed, spec, sequence_id);
        if let Some(cex) = falsify(net, seq, spec, options.falsify_budget, seed)? {
            verdict.outcome = Outcome::NonRobust;
            verdict.counterexample = Some(cex);
        }
    }
    if options.timing == Timing::Wall {
        verdict.runtime = started.elapsed().as_secs_f64();
    }
    Ok(verdict)
}

/// Searches the perturbation box for a misclassified sequence.
///
/// Candidates, in order: the two all-extreme corners, each single cell
/// pushed to either extreme, then alternating random corners and uniform
/// interior points. At most `budget` candidates are evaluated.
pub fn falsify(
    net: &NetworkSpec,
    seq: &SequenceTensor,
    spec: &PerturbationSpec,
    budget: usize,
    seed: u64,
) -> Result<Option<SequenceTensor>> {
    let cells: Vec<PerturbedCell> = perturbed_cells(seq, spec)?
        .into_iter()
        .filter(|c| c.delta > 0.0)
        .collect();
    if budget == 0 || cells.is_empty() {
        return Ok(None);
    }
    let target = max_id(&net.forward(seq)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let candidate = |signs: &mut dyn FnMut(usize) -> f64| {
        let mut values: Array2<f64> = seq.values.clone();
        for (j, c) in cells.iter().enumerate() {
            values[[c.feature, c.step]] += signs(j) * c.delta;
        }
        values
    };
    let misclassified = |values: Array2<f64>| -> Result<Option<SequenceTensor>> {
        let x = SequenceTensor {
            values,
            label: seq.label,
        };
        Ok((max_id(&net.forward(&x)?) != target).then_some(x))
    };

    let n = cells.len();
    let mut tried = 0;
    let mut heuristics: Vec<Box<dyn FnMut(usize) -> f64>> =
        vec![Box::new(|_| 1.0), Box::new(|_| -1.0)];
    for cell in 0..n {
        for sign in [1.0, -1.0] {
            heuristics.push(Box::new(move |j| if j == cell { sign } else { 0.0 }));
        }
    }
    for mut h in heuristics {
        if tried == budget {
            return Ok(None);
        }
        tried += 1;
        if let Some(x) = misclassified(candidate(&mut *h))? {
            return Ok(Some(x));
        }
    }
    while tried < budget {
        let corner = tried % 2 == 0;
        let values = candidate(&mut |_| {
            if corner {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.gen_range(-1.0..=1.0)
            }
        });
        tried += 1;
        if let Some(x) = misclassified(values)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Per-task seed, independent of scheduling order.
fn task_seed(seed: u64, spec: &PerturbationSpec, sequence_id: usize) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for word in [
        spec.kind as u64,
        spec.epsilon_percent.to_bits(),
        sequence_id as u64,
    ] {
        h = splitmix(h ^ word);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Aggregate of one (ε, kind) cell of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignCell {
    pub epsilon_percent: f64,
    pub kind: PerturbationKind,
    pub n_total: usize,
    pub n_robust: usize,
    pub n_non_robust: usize,
    pub n_unknown: usize,
    /// `100 · N_robust / N_total`.
    pub pr: f64,
    /// Total verification runtime in seconds.
    pub sum_rt: f64,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSettings {
    pub smooth_relaxation: crate::activation::SmoothRelaxation,
    pub relu_mode: ReluMode,
    pub split_budget: usize,
    pub falsify_budget: usize,
    pub seed: u64,
    pub union_rule: UnionRule,
    pub timing: Timing,
    pub target_feature: usize,
    pub target_instance: usize,
    /// How perturbation radii are derived.
    pub delta_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub model: String,
    /// Effective front-end configuration, when run from the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub settings: CampaignSettings,
    pub kinds: Vec<PerturbationKind>,
    pub epsilons: Vec<f64>,
    /// Sequences entering the campaign (correctly classified ones).
    pub sequences: Vec<usize>,
    pub dataset_size: usize,
    pub cells: Vec<CampaignCell>,
}

/// What to sweep in a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignPlan {
    pub kinds: Vec<PerturbationKind>,
    pub epsilons: Vec<f64>,
    pub target_feature: usize,
    pub target_instance: usize,
}

impl CampaignPlan {
    pub fn new(kinds: Vec<PerturbationKind>, epsilons: Vec<f64>) -> Self {
        Self {
            kinds,
            epsilons,
            target_feature: 0,
            target_instance: 0,
        }
    }
}

/// Runs every `kind × ε × sequence` task over the correctly classified part
/// of `dataset`. `jobs` bounds parallelism (0 = rayon default); the report
/// does not depend on it.
pub fn run_campaign(
    net: &NetworkSpec,
    dataset: &[SequenceTensor],
    plan: &CampaignPlan,
    options: &VerifyOptions,
    jobs: usize,
) -> Result<CampaignReport> {
    if dataset.is_empty() {
        return Err(Error::Config("dataset is empty".into()));
    }
    if plan.kinds.is_empty() || plan.epsilons.is_empty() {
        return Err(Error::Config("campaign needs at least one kind and one epsilon".into()));
    }
    if let Some((i, s)) = dataset
        .iter()
        .enumerate()
        .find(|(_, s)| s.features() != net.input_features())
    {
        return Err(Error::Config(format!(
            "sequence {i} has {} features, model '{}' expects {}",
            s.features(),
            net.name,
            net.input_features()
        )));
    }
    net.check_mode(&options.mode)?;

    let mut sequences = Vec::new();
    for (i, s) in dataset.iter().enumerate() {
        let predicted = max_id(&net.forward(s)?);
        if s.label.is_none_or(|l| l == predicted) {
            sequences.push(i);
        }
    }
    if sequences.is_empty() {
        return Err(Error::Config("no correctly classified sequences in the dataset".into()));
    }

    let mut specs = Vec::new();
    for &eps in &plan.epsilons {
        for &kind in &plan.kinds {
            let spec = PerturbationSpec::new(kind, eps)?
                .with_feature(plan.target_feature)
                .with_instance(plan.target_instance);
            specs.push(spec);
        }
    }
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|c| sequences.iter().map(move |&s| (c, s)))
        .collect();

    let run = || -> Result<Vec<Verdict>> {
        tasks
            .par_iter()
            .map(|&(c, s)| check_local_robustness(net, &dataset[s], &specs[c], options, s))
            .collect()
    };
    let verdicts = if jobs == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?
    };

    let per_cell = sequences.len();
    let cells = specs
        .iter()
        .zip(verdicts.chunks(per_cell))
        .map(|(spec, chunk)| {
            let count = |o: Outcome| chunk.iter().filter(|v| v.outcome == o).count();
            let n_robust = count(Outcome::Robust);
            CampaignCell {
                epsilon_percent: spec.epsilon_percent,
                kind: spec.kind,
                n_total: chunk.len(),
                n_robust,
                n_non_robust: count(Outcome::NonRobust),
                n_unknown: count(Outcome::Unknown),
                pr: 100.0 * n_robust as f64 / chunk.len() as f64,
                sum_rt: chunk.iter().map(|v| v.runtime).sum(),
                verdicts: chunk.to_vec(),
            }
        })
        .collect();

    Ok(CampaignReport {
        model: net.name.clone(),
        config: None,
        settings: CampaignSettings {
            smooth_relaxation: options.mode.smooth,
            relu_mode: options.mode.relu,
            split_budget: options.mode.split_budget,
            falsify_budget: options.falsify_budget,
            seed: options.seed,
            union_rule: options.rule(),
            timing: options.timing,
            target_feature: plan.target_feature,
            target_instance: plan.target_instance,
            delta_rule: "delta_f = epsilon_percent/100 * |mean over steps of feature f|".into(),
        },
        kinds: plan.kinds.clone(),
        epsilons: plan.epsilons.clone(),
        sequences,
        dataset_size: dataset.len(),
        cells,
    })
}

/// Fixed-precision number with trailing zeros trimmed: `98`, `80.33`.
pub fn format_trimmed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    } else {
        s
    }
}

impl CampaignReport {
    pub fn cell(&self, epsilon: f64, kind: PerturbationKind) -> Option<&CampaignCell> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.epsilon_percent == epsilon)
    }

    fn ordered_kinds(&self) -> Vec<PerturbationKind> {
        PerturbationKind::ALL
            .into_iter()
            .filter(|k| self.kinds.contains(k))
            .collect()
    }

    /// Header `noise, PR_<kind>…, sumRT_<kind>…`; one row per ε.
    pub fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let kinds = self.ordered_kinds();
        let mut header = vec!["noise".to_string()];
        header.extend(kinds.iter().map(|k| format!("PR_{k}")));
        header.extend(kinds.iter().map(|k| format!("sumRT_{k}")));
        let rows = self
            .epsilons
            .iter()
            .map(|&eps| {
                let mut row = vec![format_trimmed(eps, 2)];
                let cells: Vec<_> = kinds
                    .iter()
                    .map(|&k| self.cell(eps, k).expect("cell for every kind and epsilon"))
                    .collect();
                row.extend(cells.iter().map(|c| format_trimmed(c.pr, 2)));
                row.extend(cells.iter().map(|c| format!("{:.4}", c.sum_rt)));
                row
            })
            .collect();
        (header, rows)
    }

    pub fn to_csv(&self) -> String {
        let (header, rows) = self.table();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory csv");
        for row in &rows {
            w.write_record(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Column-aligned text rendering of [`CampaignReport::table`].
    pub fn render_table(&self) -> String {
        let (header, rows) = self.table();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                rows.iter()
                    .map(|r| r[i].len())
                    .chain(std::iter::once(header[i].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = line(&header);
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}
