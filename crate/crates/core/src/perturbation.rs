//! l∞ input sets for the four perturbation supports: a single feature or
//! every feature, at a single time instance or at every instance.
//!
//! The radius for feature `f` is `δ_f = ε% · |mean_t s[f, t]|`, the mean
//! taken over the sequence's own steps. Each perturbed cell gets its own
//! predicate variable ranging over `[−δ_f, δ_f]`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layer::SequenceStar;
use crate::network::SequenceTensor;
use crate::star::{Predicate, Star};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PerturbationKind {
    /// Single feature, single instance.
    Sfsi,
    /// Single feature, all instances.
    Sfai,
    /// Every feature, single instance.
    Mfsi,
    /// Every feature, all instances.
    Mfai,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 4] = [
        PerturbationKind::Sfsi,
        PerturbationKind::Sfai,
        PerturbationKind::Mfsi,
        PerturbationKind::Mfai,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationKind::Sfsi => "SFSI",
            PerturbationKind::Sfai => "SFAI",
            PerturbationKind::Mfsi => "MFSI",
            PerturbationKind::Mfai => "MFAI",
        }
    }

    pub fn single_feature(self) -> bool {
        matches!(self, PerturbationKind::Sfsi | PerturbationKind::Sfai)
    }

    pub fn single_instance(self) -> bool {
        matches!(self, PerturbationKind::Sfsi | PerturbationKind::Mfsi)
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SFSI" => Ok(PerturbationKind::Sfsi),
            "SFAI" => Ok(PerturbationKind::Sfai),
            "MFSI" => Ok(PerturbationKind::Mfsi),
            "MFAI" => Ok(PerturbationKind::Mfai),
            other => Err(Error::Perturbation(format!("unknown perturbation kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub epsilon_percent: f64,
    /// Perturbed feature for single-feature kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_feature: Option<usize>,
    /// Perturbed step for single-instance kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_instance: Option<usize>,
}

impl PerturbationSpec {
    /// Spec with the default targets: feature 0 and instance 0 where the
    /// kind needs them.
    pub fn new(kind: PerturbationKind, epsilon_percent: f64) -> Result<Self> {
        if !(epsilon_percent > 0.0 && epsilon_percent <= 100.0) {
            return Err(Error::Perturbation(format!(
                "epsilon_percent must lie in (0, 100], got {epsilon_percent}"
            )));
        }
        Ok(Self {
            kind,
            epsilon_percent,
            target_feature: kind.single_feature().then_some(0),
            target_instance: kind.single_instance().then_some(0),
        })
    }

    pub fn with_feature(mut self, feature: usize) -> Self {
        if self.kind.single_feature() {
            self.target_feature = Some(feature);
        }
        self
    }

    pub fn with_instance(mut self, instance: usize) -> Self {
        if self.kind.single_instance() {
            self.target_instance = Some(instance);
        }
        self
    }

    fn features(&self, n_f: usize) -> Result<Vec<usize>> {
        if self.kind.single_feature() {
            let f = self.target_feature.ok_or_else(|| {
                Error::Perturbation(format!("{} needs a target feature", self.kind))
            })?;
            if f >= n_f {
                return Err(Error::Perturbation(format!(
                    "target feature {f} out of range for {n_f} features"
                )));
            }
            Ok(vec![f])
        } else {
            Ok((0..n_f).collect())
        }
    }

    fn instances(&self, t_s: usize) -> Result<Vec<usize>> {
        if self.kind.single_instance() {
            let t = self.target_instance.ok_or_else(|| {
                Error::Perturbation(format!("{} needs a target instance", self.kind))
            })?;
            if t >= t_s {
                return Err(Error::Perturbation(format!(
                    "target instance {t} out of range for {t_s} steps"
                )));
            }
            Ok(vec![t])
        } else {
            Ok((0..t_s).collect())
        }
    }
}

/// `δ_f = (ε/100)·|mean_t s[f, t]|`; zero when the mean is zero.
pub fn delta_for(seq: &SequenceTensor, spec: &PerturbationSpec, feature: usize) -> Result<f64> {
    if feature >= seq.features() {
        return Err(Error::Perturbation(format!(
            "feature {feature} out of range for {} features",
            seq.features()
        )));
    }
    let mean = seq.values.row(feature).mean().unwrap_or(0.0);
    Ok(spec.epsilon_percent / 100.0 * mean.abs())
}

/// One perturbed cell of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedCell {
    pub feature: usize,
    pub step: usize,
    pub delta: f64,
}

/// Every cell in the perturbation support, feature-major, with its radius.
pub fn perturbed_cells(seq: &SequenceTensor, spec: &PerturbationSpec) -> Result<Vec<PerturbedCell>> {
    let features = spec.features(seq.features())?;
    let instances = spec.instances(seq.steps())?;
    let mut cells = Vec::with_capacity(features.len() * instances.len());
    for &feature in &features {
        let delta = delta_for(seq, spec, feature)?;
        for &step in &instances {
            cells.push(PerturbedCell {
                feature,
                step,
                delta,
            });
        }
    }
    Ok(cells)
}

/// The input set: centered on `seq`, one variable per perturbed cell with
/// non-zero radius, every other cell an exact constant.
pub fn build_star(seq: &SequenceTensor, spec: &PerturbationSpec) -> Result<SequenceStar> {
    let cells: Vec<PerturbedCell> = perturbed_cells(seq, spec)?
        .into_iter()
        .filter(|c| c.delta > 0.0)
        .collect();
    let (n_f, t_s) = (seq.features(), seq.steps());
    let center: Array1<f64> = (0..t_s)
        .flat_map(|t| (0..n_f).map(move |f| (f, t)))
        .map(|(f, t)| seq.values[[f, t]])
        .collect();
    let mut basis = Array2::zeros((n_f * t_s, cells.len()));
    for (j, cell) in cells.iter().enumerate() {
        basis[[cell.step * n_f + cell.feature, j]] = cell.delta;
    }
    let m = cells.len();
    let predicate = Predicate::from_bounds(vec![-1.0; m], vec![1.0; m])?;
    let star = Star::from_shared(center, basis, std::sync::Arc::new(predicate))?;
    SequenceStar::new(star, n_f, t_s)
}
