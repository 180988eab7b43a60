//! Layer descriptions, their concrete evaluation, and per-layer reachability.
//!
//! Data between layers is always a sequence (`features × steps`). A layer
//! that produces a plain vector (an LSTM in `last` mode) produces a one-step
//! sequence, and fully-connected layers act on every step independently.
//! Sequence stars stack their steps time-major into one [`Star`] so that all
//! steps stay affine images of one shared predicate.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::activation::{
    elementwise_reach, relu_reach, tanh_reach, ActivationKind, ReluMode, SmoothRelaxation,
};
use crate::error::{Error, Result};
use crate::star::Star;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    FullyConnected(FullyConnected),
    Conv1d(Conv1d),
    Relu,
    Lstm(Lstm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullyConnected {
    #[serde(rename = "W", with = "dense::matrix")]
    pub weights: Array2<f64>,
    #[serde(rename = "b", with = "dense::vector")]
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1d {
    /// `out_channels × in_channels × kernel`.
    #[serde(with = "dense::tensor3")]
    pub weights: Array3<f64>,
    #[serde(with = "dense::vector")]
    pub bias: Array1<f64>,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub padding: usize,
    #[serde(default = "one")]
    pub dilation: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    #[default]
    Last,
    Sequence,
}

/// LSTM layer with input weights `W_•` (hidden × in), recurrent weights
/// `R_•` (hidden × hidden) and biases `b_•` for the input, forget, cell
/// candidate and output gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    #[serde(rename = "W_i", with = "dense::matrix")]
    pub w_i: Array2<f64>,
    #[serde(rename = "W_f", with = "dense::matrix")]
    pub w_f: Array2<f64>,
    #[serde(rename = "W_g", with = "dense::matrix")]
    pub w_g: Array2<f64>,
    #[serde(rename = "W_o", with = "dense::matrix")]
    pub w_o: Array2<f64>,
    #[serde(rename = "R_i", with = "dense::matrix")]
    pub r_i: Array2<f64>,
    #[serde(rename = "R_f", with = "dense::matrix")]
    pub r_f: Array2<f64>,
    #[serde(rename = "R_g", with = "dense::matrix")]
    pub r_g: Array2<f64>,
    #[serde(rename = "R_o", with = "dense::matrix")]
    pub r_o: Array2<f64>,
    #[serde(rename = "b_i", with = "dense::vector")]
    pub b_i: Array1<f64>,
    #[serde(rename = "b_f", with = "dense::vector")]
    pub b_f: Array1<f64>,
    #[serde(rename = "b_g", with = "dense::vector")]
    pub b_g: Array1<f64>,
    #[serde(rename = "b_o", with = "dense::vector")]
    pub b_o: Array1<f64>,
    #[serde(default)]
    pub output_mode: OutputMode,
}

impl Lstm {
    pub fn hidden_size(&self) -> usize {
        self.w_i.nrows()
    }

    pub fn input_size(&self) -> usize {
        self.w_i.ncols()
    }

    /// A layer with every weight and bias zero.
    pub fn zeros(input: usize, hidden: usize, output_mode: OutputMode) -> Self {
        let w = || Array2::zeros((hidden, input));
        let r = || Array2::zeros((hidden, hidden));
        let b = || Array1::zeros(hidden);
        Self {
            w_i: w(),
            w_f: w(),
            w_g: w(),
            w_o: w(),
            r_i: r(),
            r_f: r(),
            r_g: r(),
            r_o: r(),
            b_i: b(),
            b_f: b(),
            b_g: b(),
            b_o: b(),
            output_mode,
        }
    }

    fn gates(&self) -> [(&Array2<f64>, &Array2<f64>, &Array1<f64>); 4] {
        [
            (&self.w_i, &self.r_i, &self.b_i),
            (&self.w_f, &self.r_f, &self.b_f),
            (&self.w_g, &self.r_g, &self.b_g),
            (&self.w_o, &self.r_o, &self.b_o),
        ]
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let (h, n) = (self.hidden_size(), self.input_size());
        if h == 0 {
            return Err("hidden size must be at least 1".into());
        }
        for (name, (w, r, b)) in ["i", "f", "g", "o"].iter().zip(self.gates()) {
            if w.dim() != (h, n) {
                return Err(format!("W_{name} is {:?}, expected ({h}, {n})", w.dim()));
            }
            if r.dim() != (h, h) {
                return Err(format!("R_{name} is {:?}, expected ({h}, {h})", r.dim()));
            }
            if b.len() != h {
                return Err(format!("b_{name} has {} entries, expected {h}", b.len()));
            }
        }
        Ok(())
    }

    /// One concrete step of the LSTM recurrence.
    pub fn step(&self, x: &Array1<f64>, h: &Array1<f64>, c: &Array1<f64>) -> (Array1<f64>, Array1<f64>) {
        let pre = |(w, r, b): (&Array2<f64>, &Array2<f64>, &Array1<f64>)| w.dot(x) + r.dot(h) + b;
        let [gi, gf, gg, go] = self.gates();
        let i = pre(gi).mapv(ActivationKind::Sigmoid.eval_fn());
        let f = pre(gf).mapv(ActivationKind::Sigmoid.eval_fn());
        let g = pre(gg).mapv(f64::tanh);
        let o = pre(go).mapv(ActivationKind::Sigmoid.eval_fn());
        let c_next = &f * c + &i * &g;
        let h_next = &o * &c_next.mapv(f64::tanh);
        (h_next, c_next)
    }
}

impl ActivationKind {
    fn eval_fn(self) -> impl Fn(f64) -> f64 {
        move |x| self.eval(x)
    }
}

impl Conv1d {
    pub fn out_channels(&self) -> usize {
        self.weights.dim().0
    }

    pub fn in_channels(&self) -> usize {
        self.weights.dim().1
    }

    pub fn kernel_size(&self) -> usize {
        self.weights.dim().2
    }

    /// `floor((L + 2·padding − dilation·(k − 1) − 1) / stride) + 1`, or
    /// `None` when that is below one.
    pub fn output_len(&self, len: usize) -> Option<usize> {
        let span = self.dilation * (self.kernel_size() - 1) + 1;
        let padded = len + 2 * self.padding;
        (padded >= span).then(|| (padded - span) / self.stride + 1)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.kernel_size() == 0 || self.out_channels() == 0 || self.in_channels() == 0 {
            return Err(format!("degenerate kernel shape {:?}", self.weights.dim()));
        }
        if self.bias.len() != self.out_channels() {
            return Err(format!(
                "bias has {} entries, expected {}",
                self.bias.len(),
                self.out_channels()
            ));
        }
        if self.stride == 0 || self.dilation == 0 {
            return Err("stride and dilation must be at least 1".into());
        }
        Ok(())
    }

    /// The convolution as one matrix over time-major stacked steps:
    /// `(out_ch·T_out) × (in_ch·T_in)` plus bias. Zero padding contributes
    /// nothing.
    fn as_affine(&self, steps: usize) -> Result<(Array2<f64>, Array1<f64>, usize)> {
        let t_out = self
            .output_len(steps)
            .ok_or_else(|| Error::dim(format!("conv1d output length < 1 for {steps} input steps")))?;
        let (oc, ic, k) = self.weights.dim();
        let mut w = Array2::zeros((oc * t_out, ic * steps));
        let mut b = Array1::zeros(oc * t_out);
        for t in 0..t_out {
            for o in 0..oc {
                let row = t * oc + o;
                b[row] = self.bias[o];
                for j in 0..k {
                    let pos = (t * self.stride + j * self.dilation) as isize - self.padding as isize;
                    if pos < 0 || pos as usize >= steps {
                        continue;
                    }
                    for c in 0..ic {
                        w[[row, pos as usize * ic + c]] += self.weights[[o, c, j]];
                    }
                }
            }
        }
        Ok((w, b, t_out))
    }
}

impl LayerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::FullyConnected(_) => "fully_connected",
            LayerSpec::Conv1d(_) => "conv1d",
            LayerSpec::Relu => "relu",
            LayerSpec::Lstm(_) => "lstm",
        }
    }

    /// Checks internal shapes and the incoming feature count; returns the
    /// outgoing feature count.
    pub fn validate(&self, index: usize, in_features: usize) -> Result<usize> {
        let check = |expected: usize, what: &str| {
            if expected == in_features {
                Ok(())
            } else {
                Err(Error::layer(
                    index,
                    format!("{what} expects {expected} input features, got {in_features}"),
                ))
            }
        };
        match self {
            LayerSpec::FullyConnected(fc) => {
                if fc.bias.len() != fc.weights.nrows() {
                    return Err(Error::layer(
                        index,
                        format!(
                            "W is {:?} but b has {} entries",
                            fc.weights.dim(),
                            fc.bias.len()
                        ),
                    ));
                }
                check(fc.weights.ncols(), "fully_connected W")?;
                Ok(fc.weights.nrows())
            }
            LayerSpec::Conv1d(conv) => {
                conv.validate().map_err(|m| Error::layer(index, m))?;
                check(conv.in_channels(), "conv1d kernel")?;
                Ok(conv.out_channels())
            }
            LayerSpec::Relu => Ok(in_features),
            LayerSpec::Lstm(lstm) => {
                lstm.validate().map_err(|m| Error::layer(index, m))?;
                check(lstm.input_size(), "lstm W")?;
                Ok(lstm.hidden_size())
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            LayerSpec::FullyConnected(fc) => fc.weights.len() + fc.bias.len(),
            LayerSpec::Conv1d(c) => c.weights.len() + c.bias.len(),
            LayerSpec::Relu => 0,
            LayerSpec::Lstm(l) => l
                .gates()
                .iter()
                .map(|(w, r, b)| w.len() + r.len() + b.len())
                .sum(),
        }
    }

    pub fn activations(&self) -> &'static [ActivationKind] {
        match self {
            LayerSpec::Relu => &[ActivationKind::Relu],
            LayerSpec::Lstm(_) => &[ActivationKind::Sigmoid, ActivationKind::Tanh],
            _ => &[],
        }
    }

    /// Concrete evaluation on a `features × steps` matrix.
    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            LayerSpec::FullyConnected(fc) => {
                if x.nrows() != fc.weights.ncols() {
                    return Err(Error::dim("fully_connected input features"));
                }
                Ok(fc.weights.dot(x) + &fc.bias.view().insert_axis(Axis(1)))
            }
            LayerSpec::Conv1d(conv) => {
                if x.nrows() != conv.in_channels() {
                    return Err(Error::dim("conv1d input channels"));
                }
                let steps = x.ncols();
                let t_out = conv.output_len(steps).ok_or_else(|| {
                    Error::dim(format!("conv1d output length < 1 for {steps} input steps"))
                })?;
                let (oc, ic, k) = conv.weights.dim();
                let mut y = Array2::zeros((oc, t_out));
                for t in 0..t_out {
                    for o in 0..oc {
                        let mut acc = conv.bias[o];
                        for j in 0..k {
                            let pos = (t * conv.stride + j * conv.dilation) as isize
                                - conv.padding as isize;
                            if pos < 0 || pos as usize >= steps {
                                continue;
                            }
                            for c in 0..ic {
                                acc += conv.weights[[o, c, j]] * x[[c, pos as usize]];
                            }
                        }
                        y[[o, t]] = acc;
                    }
                }
                Ok(y)
            }
            LayerSpec::Relu => Ok(x.mapv(|v| v.max(0.0))),
            LayerSpec::Lstm(lstm) => {
                if x.nrows() != lstm.input_size() {
                    return Err(Error::dim("lstm input features"));
                }
                let hidden = lstm.hidden_size();
                let mut h = Array1::zeros(hidden);
                let mut c = Array1::zeros(hidden);
                let mut outputs = Array2::zeros((hidden, x.ncols()));
                for (t, col) in x.axis_iter(Axis(1)).enumerate() {
                    (h, c) = lstm.step(&col.to_owned(), &h, &c);
                    outputs.column_mut(t).assign(&h);
                }
                Ok(match lstm.output_mode {
                    OutputMode::Sequence => outputs,
                    OutputMode::Last => outputs.slice(s![.., x.ncols() - 1..]).to_owned(),
                })
            }
        }
    }
}

/// A set of `features × steps` sequences, stored as one star over the
/// time-major stacking `[x_0; x_1; …]`. Every step is an affine image of
/// the same predicate.
#[derive(Debug, Clone)]
pub struct SequenceStar {
    star: Star,
    features: usize,
    steps: usize,
}

impl SequenceStar {
    pub fn new(star: Star, features: usize, steps: usize) -> Result<Self> {
        if steps == 0 || features == 0 {
            return Err(Error::dim("a sequence star needs at least one step and feature"));
        }
        if star.dim() != features * steps {
            return Err(Error::dim(format!(
                "stacked star has dimension {}, expected {features}×{steps}",
                star.dim()
            )));
        }
        Ok(Self {
            star,
            features,
            steps,
        })
    }

    /// Stacks per-step stars. They must share one predicate, or live in one
    /// space with predicates nested so that all lift into the widest.
    pub fn from_steps(parts: &[Star]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::dim("a sequence star needs at least one step"))?;
        let features = first.dim();
        let widest = parts
            .iter()
            .max_by_key(|p| p.num_vars())
            .expect("non-empty")
            .shared_predicate()
            .clone();
        let lifted = parts
            .iter()
            .map(|p| p.lift_to(&widest))
            .collect::<Result<Vec<_>>>()?;
        if lifted.iter().any(|p| p.dim() != features) {
            return Err(Error::dim("sequence steps differ in dimension"));
        }
        Self::new(Star::stack(&lifted)?, features, parts.len())
    }

    /// The point sequence `values` (`features × steps`).
    pub fn point(values: &Array2<f64>) -> Result<Self> {
        let stacked: Vec<f64> = values.t().iter().copied().collect();
        Self::new(Star::point(&stacked), values.nrows(), values.ncols())
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn star(&self) -> &Star {
        &self.star
    }

    pub fn into_star(self) -> Star {
        self.star
    }

    /// Index of `(feature, step)` in the stacked star.
    pub fn index(&self, feature: usize, step: usize) -> usize {
        step * self.features + feature
    }

    pub fn step(&self, t: usize) -> Star {
        self.star
            .rows(t * self.features..(t + 1) * self.features)
    }

    pub fn last_step(&self) -> Star {
        self.step(self.steps - 1)
    }

    /// Rearranges a stacked point back into `features × steps`.
    pub fn unstack(&self, stacked: &Array1<f64>) -> Array2<f64> {
        Array2::from_shape_fn((self.features, self.steps), |(f, t)| {
            stacked[self.index(f, t)]
        })
    }
}

/// Hidden and cell state sets over one shared predicate.
#[derive(Debug, Clone)]
pub struct LstmStateStars {
    pub hidden: Star,
    pub cell: Star,
}

impl LstmStateStars {
    /// `h_0 = c_0 = 0`.
    pub fn zeros(hidden: usize) -> Self {
        let z = Star::point(&vec![0.0; hidden]);
        Self {
            hidden: z.clone(),
            cell: z,
        }
    }
}

/// Reachability settings for one pass through a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachMode {
    pub smooth: SmoothRelaxation,
    pub relu: ReluMode,
    pub split_budget: usize,
}

impl Default for ReachMode {
    fn default() -> Self {
        Self {
            smooth: SmoothRelaxation::Interval,
            relu: ReluMode::Approx,
            split_budget: crate::activation::DEFAULT_SPLIT_BUDGET,
        }
    }
}

pub fn fc_reach(s: &Star, layer: &FullyConnected) -> Result<Star> {
    s.affine_map(&layer.weights, &layer.bias)
}

/// Fully-connected layer applied to every step.
pub fn fc_sequence_reach(seq: &SequenceStar, layer: &FullyConnected) -> Result<SequenceStar> {
    let steps = (0..seq.steps())
        .map(|t| fc_reach(&seq.step(t), layer))
        .collect::<Result<Vec<_>>>()?;
    SequenceStar::new(Star::stack(&steps)?, layer.weights.nrows(), seq.steps())
}

/// Exact: the convolution is one affine map over the stacked steps.
pub fn conv1d_reach(seq: &SequenceStar, layer: &Conv1d) -> Result<SequenceStar> {
    if seq.features() != layer.in_channels() {
        return Err(Error::dim(format!(
            "conv1d expects {} channels, sequence has {}",
            layer.in_channels(),
            seq.features()
        )));
    }
    let (w, b, t_out) = layer.as_affine(seq.steps())?;
    SequenceStar::new(seq.star().affine_map(&w, &b)?, layer.out_channels(), t_out)
}

/// Elementwise ReLU over a sequence. Approx mode returns one member whose
/// fresh variables are appended to the shared space; exact mode may return
/// many.
pub fn relu_layer_reach(seq: &SequenceStar, mode: ReluMode, budget: usize) -> Result<Vec<SequenceStar>> {
    relu_reach(seq.star(), mode, budget)?
        .into_members()
        .into_iter()
        .map(|s| SequenceStar::new(s, seq.features(), seq.steps()))
        .collect()
}

/// One step of the LSTM recurrence over sets.
///
/// 1. pre-activations `W_•x_t + R_•h_{t−1} + b_•` as shared-variable sums;
/// 2. `i, f, o` by sigmoid and `g` by tanh, relaxed together so the four
///    gates share one widened space;
/// 3. `c_t = f ⊙ c_{t−1} + i ⊙ g` with LP enclosures for both products;
/// 4. `h_t = o ⊙ tanh(c_t)`.
pub fn lstm_step_reach(
    x_t: &Star,
    state: &LstmStateStars,
    layer: &Lstm,
    mode: SmoothRelaxation,
) -> Result<LstmStateStars> {
    let hidden = layer.hidden_size();
    if x_t.dim() != layer.input_size() {
        return Err(Error::dim(format!(
            "lstm expects {} input features, step has {}",
            layer.input_size(),
            x_t.dim()
        )));
    }
    if state.hidden.dim() != hidden || state.cell.dim() != hidden {
        return Err(Error::dim("lstm state does not match the hidden size"));
    }

    let (h, c) = Star::align(&state.hidden, &state.cell)?;
    let (x, hc) = Star::align(x_t, &Star::stack(&[h, c])?)?;
    let (h, c) = (hc.rows(0..hidden), hc.rows(hidden..2 * hidden));

    let pre = layer
        .gates()
        .iter()
        .map(|(w, r, b)| x.affine_map(w, b)?.shared_variable_sum(&h.linear_map(r)?))
        .collect::<Result<Vec<_>>>()?;
    let pre = Star::stack(&pre)?;
    let kinds: Vec<ActivationKind> = [
        ActivationKind::Sigmoid,
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::Sigmoid,
    ]
    .iter()
    .flat_map(|&k| std::iter::repeat_n(k, hidden))
    .collect();
    let gates = elementwise_reach(&pre, &kinds, mode)?;
    let gate = |k: usize| gates.rows(k * hidden..(k + 1) * hidden);
    let (i, f, g, o) = (gate(0), gate(1), gate(2), gate(3));
    let c_prev = c.lift_to(gates.shared_predicate())?;

    let left = Star::stack(&[f, i])?;
    let right = Star::stack(&[c_prev, g])?;
    let products = left.hadamard_product(&right, &left.range_of(None)?, &right.range_of(None)?)?;
    let cell = products
        .rows(0..hidden)
        .shared_variable_sum(&products.rows(hidden..2 * hidden))?;

    let squashed = tanh_reach(&cell, mode)?;
    let o = o.lift_to(squashed.shared_predicate())?;
    let hidden_star = o.hadamard_product(&squashed, &o.range_of(None)?, &squashed.range_of(None)?)?;
    let cell = cell.lift_to(hidden_star.shared_predicate())?;
    Ok(LstmStateStars {
        hidden: hidden_star,
        cell,
    })
}

/// Folds [`lstm_step_reach`] over the sequence from zero states. Returns
/// every hidden state (`sequence` mode) or the last one as a one-step
/// sequence (`last` mode).
pub fn lstm_reach(seq: &SequenceStar, layer: &Lstm, mode: SmoothRelaxation) -> Result<SequenceStar> {
    let mut state = LstmStateStars::zeros(layer.hidden_size());
    let mut outputs = Vec::with_capacity(seq.steps());
    for t in 0..seq.steps() {
        state = lstm_step_reach(&seq.step(t), &state, layer, mode)?;
        if layer.output_mode == OutputMode::Sequence {
            outputs.push(state.hidden.clone());
        }
    }
    match layer.output_mode {
        OutputMode::Last => SequenceStar::new(state.hidden, layer.hidden_size(), 1),
        OutputMode::Sequence => {
            let widest = Arc::clone(state.hidden.shared_predicate());
            let lifted = outputs
                .iter()
                .map(|s| s.lift_to(&widest))
                .collect::<Result<Vec<_>>>()?;
            SequenceStar::new(Star::stack(&lifted)?, layer.hidden_size(), seq.steps())
        }
    }
}

/// Reachability of any layer kind over a single sequence star.
pub fn layer_reach(layer: &LayerSpec, seq: &SequenceStar, mode: &ReachMode) -> Result<Vec<SequenceStar>> {
    match layer {
        LayerSpec::FullyConnected(fc) => Ok(vec![fc_sequence_reach(seq, fc)?]),
        LayerSpec::Conv1d(conv) => Ok(vec![conv1d_reach(seq, conv)?]),
        LayerSpec::Relu => relu_layer_reach(seq, mode.relu, mode.split_budget),
        LayerSpec::Lstm(lstm) => Ok(vec![lstm_reach(seq, lstm, mode.smooth)?]),
    }
}

/// Nested-array (row-major) JSON encodings for dense ndarray values.
pub(crate) mod dense {
    pub mod vector {
        use ndarray::Array1;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &Array1<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.to_vec().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array1<f64>, D::Error> {
            Ok(Array1::from(Vec::<f64>::deserialize(d)?))
        }
    }

    pub mod matrix {
        use ndarray::Array2;
        use serde::de::Error as _;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<f64>> = m.outer_iter().map(|r| r.to_vec()).collect();
            rows.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
            let rows = Vec::<Vec<f64>>::deserialize(d)?;
            from_rows(rows).map_err(D::Error::custom)
        }

        pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>, String> {
            let cols = rows.first().map_or(0, Vec::len);
            if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
                return Err(format!(
                    "ragged matrix: row {bad} has {} entries, row 0 has {cols}",
                    rows[bad].len()
                ));
            }
            let n = rows.len();
            Array2::from_shape_vec((n, cols), rows.concat()).map_err(|e| e.to_string())
        }
    }

    pub mod tensor3 {
        use ndarray::Array3;
        use serde::de::Error as _;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(t: &Array3<f64>, s: S) -> Result<S::Ok, S::Error> {
            let nested: Vec<Vec<Vec<f64>>> = t
                .outer_iter()
                .map(|m| m.outer_iter().map(|r| r.to_vec()).collect())
                .collect();
            nested.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array3<f64>, D::Error> {
            let nested = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
            let a = nested.len();
            let b = nested.first().map_or(0, Vec::len);
            let c = nested.first().and_then(|m| m.first()).map_or(0, Vec::len);
            if nested
                .iter()
                .any(|m| m.len() != b || m.iter().any(|r| r.len() != c))
            {
                return Err(D::Error::custom("ragged conv1d weight tensor"));
            }
            let flat: Vec<f64> = nested.into_iter().flatten().flatten().collect();
            Array3::from_shape_vec((a, b, c), flat).map_err(D::Error::custom)
        }
    }
}
