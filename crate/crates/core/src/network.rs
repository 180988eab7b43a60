//! Network container, JSON model and dataset formats, concrete forward
//! evaluation and whole-network reachability.
//!
//! Model file:
//!
//! ```json
//! {"name": "noise_lstm_tiny", "input_features": 2,
//!  "labels": ["white", "brown", "pink"],
//!  "layers": [{"kind": "lstm", "W_i": [[...]], ..., "output_mode": "last"},
//!             {"kind": "fully_connected", "W": [[...]], "b": [...]}]}
//! ```
//!
//! Dataset file: JSON lines, one `{"values": [[...], ...], "label": k}` per
//! sequence with `values` laid out `features × steps`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ReluMode};
use crate::error::{Error, Result};
use crate::layer::{dense, layer_reach, LayerSpec, ReachMode, SequenceStar};
use crate::star::StarUnion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NetworkFile {
    #[serde(default)]
    name: String,
    input_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dim: Option<usize>,
    #[serde(default)]
    labels: Vec<String>,
    layers: Vec<LayerSpec>,
}

/// A dimension-checked, pre-softmax sequence classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    input_features: usize,
    layers: Vec<LayerSpec>,
    output_dim: usize,
    pub labels: Vec<String>,
}

impl NetworkSpec {
    pub fn new(
        name: impl Into<String>,
        input_features: usize,
        layers: Vec<LayerSpec>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if input_features == 0 {
            return Err(Error::Config("input_features must be at least 1".into()));
        }
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        let mut features = input_features;
        for (index, layer) in layers.iter().enumerate() {
            features = layer.validate(index, features)?;
        }
        if !labels.is_empty() && labels.len() != features {
            return Err(Error::Config(format!(
                "{} labels for {features} network outputs",
                labels.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            input_features,
            layers,
            output_dim: features,
            labels,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<model>".into(),
            message: e.to_string(),
        })?;
        let declared = file.output_dim;
        let net = Self::new(file.name, file.input_features, file.layers, file.labels)?;
        if let Some(d) = declared {
            if d != net.output_dim {
                return Err(Error::layer(
                    net.layers.len() - 1,
                    format!("final layer produces {} outputs, output_dim is {d}", net.output_dim),
                ));
            }
        }
        Ok(net)
    }

    pub fn to_json_string(&self) -> String {
        let file = NetworkFile {
            name: self.name.clone(),
            input_features: self.input_features,
            output_dim: Some(self.output_dim),
            labels: self.labels.clone(),
            layers: self.layers.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }

    pub fn input_features(&self) -> usize {
        self.input_features
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn activation_kinds(&self) -> Vec<ActivationKind> {
        let mut kinds: Vec<ActivationKind> = Vec::new();
        for k in self.layers.iter().flat_map(|l| l.activations()) {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
        kinds
    }

    pub fn has_lstm(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, LayerSpec::Lstm(_)))
    }

    /// Rejects exact ReLU splitting on networks with sigmoid/tanh layers:
    /// those have no exact star image.
    pub fn check_mode(&self, mode: &ReachMode) -> Result<()> {
        if mode.relu == ReluMode::ExactSplit && self.has_lstm() {
            return Err(Error::UnsupportedMode(format!(
                "exact mode requested but network '{}' contains LSTM (sigmoid/tanh) layers",
                self.name
            )));
        }
        Ok(())
    }

    /// Pre-softmax output: the last step of the final layer's output.
    pub fn forward(&self, x: &SequenceTensor) -> Result<Vec<f64>> {
        if x.features() != self.input_features {
            return Err(Error::dim(format!(
                "network expects {} features, sequence has {}",
                self.input_features,
                x.features()
            )));
        }
        let mut values = x.values.clone();
        for layer in &self.layers {
            values = layer.forward(&values)?;
        }
        Ok(values.column(values.ncols() - 1).to_vec())
    }

    /// Output reachable set: layer reachability folded in declaration order.
    pub fn reach(&self, input: &SequenceStar, mode: &ReachMode) -> Result<StarUnion> {
        self.check_mode(mode)?;
        if input.features() != self.input_features {
            return Err(Error::dim(format!(
                "network expects {} features, input set has {}",
                self.input_features,
                input.features()
            )));
        }
        let mut sets = vec![input.clone()];
        for layer in &self.layers {
            let mut next = Vec::with_capacity(sets.len());
            for set in &sets {
                next.extend(layer_reach(layer, set, mode)?);
                if next.len() > mode.split_budget {
                    return Err(Error::SplitBudget {
                        budget: mode.split_budget,
                    });
                }
            }
            sets = next;
        }
        StarUnion::new(sets.iter().map(SequenceStar::last_step).collect())
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NetworkSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    NetworkSpec::from_json_str(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.into(),
            message,
        },
        other => other,
    })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn max_id(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// A concrete sequence sample, `features × steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTensor {
    #[serde(with = "dense::matrix")]
    pub values: Array2<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

impl SequenceTensor {
    pub fn new(values: Array2<f64>, label: Option<usize>) -> Result<Self> {
        let s = Self { values, label };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.values.ncols() == 0 || self.values.nrows() == 0 {
            return Err(Error::dim("a sequence needs at least one feature and one step"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::dim("sequence contains non-finite values"));
        }
        Ok(())
    }

    pub fn features(&self) -> usize {
        self.values.nrows()
    }

    pub fn steps(&self) -> usize {
        self.values.ncols()
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<SequenceTensor>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.into(),
            message: format!("line {}: {message}", lineno + 1),
        };
        let seq: SequenceTensor =
            serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        seq.validate().map_err(|e| parse_err(e.to_string()))?;
        out.push(seq);
    }
    Ok(out)
}

pub fn save_dataset(path: impl AsRef<Path>, data: &[SequenceTensor]) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.into(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    for seq in data {
        let line = serde_json::to_string(seq).expect("sequence serialization");
        writeln!(file, "{line}").map_err(io)?;
    }
    Ok(())
}
