//! Star relaxations of elementwise activations.
//!
//! ReLU has an exact image as a union of stars (case split on the sign of
//! each neuron) and a single-star triangle relaxation. Sigmoid and tanh have
//! no exact star image; both relaxations below introduce one fresh variable
//! per non-constant neuron.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::star::{IntervalBox, Star, StarUnion};

/// Default cap on the number of stars an exact ReLU split may produce.
pub const DEFAULT_SPLIT_BUDGET: usize = 10_000;

/// Chords over intervals narrower than this are skipped (ill-conditioned).
const MIN_CHORD_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    /// Logistic sigmoid, the LSTM gate activation.
    Sigmoid,
    /// Hyperbolic tangent, the LSTM cell/state activation.
    Tanh,
}

impl ActivationKind {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Relaxation used for sigmoid and tanh neurons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothRelaxation {
    /// `f(l) ≤ y ≤ f(u)`, uncoupled from the input.
    #[default]
    Interval,
    /// Interval bounds plus chord and endpoint tangents whenever the
    /// pre-activation range lies on one side of zero.
    Secant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReluMode {
    ExactSplit,
    /// Triangle relaxation.
    #[default]
    Approx,
}

/// ReLU reachability. `budget` caps the number of stars an exact split may
/// produce; it is ignored in approx mode.
pub fn relu_reach(s: &Star, mode: ReluMode, budget: usize) -> Result<StarUnion> {
    match mode {
        ReluMode::Approx => {
            let kinds = vec![ActivationKind::Relu; s.dim()];
            Ok(StarUnion::single(elementwise_reach(
                s,
                &kinds,
                SmoothRelaxation::Interval,
            )?))
        }
        ReluMode::ExactSplit => relu_exact(s, budget),
    }
}

pub fn sigmoid_reach(s: &Star, mode: SmoothRelaxation) -> Result<Star> {
    elementwise_reach(s, &vec![ActivationKind::Sigmoid; s.dim()], mode)
}

pub fn tanh_reach(s: &Star, mode: SmoothRelaxation) -> Result<Star> {
    elementwise_reach(s, &vec![ActivationKind::Tanh; s.dim()], mode)
}

/// Single-star over-approximation of a per-coordinate activation.
///
/// Constant coordinates map exactly. A ReLU neuron whose range is `u ≤ 0`
/// is pinned to zero and one with `l ≥ 0` passes through; every other
/// neuron gets one fresh variable `y`, appended to the star's predicate.
pub fn elementwise_reach(
    s: &Star,
    kinds: &[ActivationKind],
    mode: SmoothRelaxation,
) -> Result<Star> {
    let n = s.dim();
    if kinds.len() != n {
        return Err(Error::dim(format!(
            "{} activation kinds for a {n}-dimensional star",
            kinds.len()
        )));
    }
    let varying: Vec<usize> = (0..n).filter(|&i| !s.is_constant_at(i)).collect();
    let ranges = s.range_of(Some(&varying))?;
    let mut bounds = vec![(0.0, 0.0); n];
    for (k, &i) in varying.iter().enumerate() {
        bounds[i] = (ranges.lower[k], ranges.upper[k]);
    }

    let m = s.num_vars();
    let center = s.center();
    let basis = s.basis();

    enum Plan {
        Constant(f64),
        Identity,
        Fresh,
    }
    let plans: Vec<Plan> = (0..n)
        .map(|i| {
            if s.is_constant_at(i) {
                return Plan::Constant(kinds[i].eval(center[i]));
            }
            let (l, u) = bounds[i];
            match kinds[i] {
                ActivationKind::Relu if u <= 0.0 => Plan::Constant(0.0),
                ActivationKind::Relu if l >= 0.0 => Plan::Identity,
                _ => Plan::Fresh,
            }
        })
        .collect();
    let fresh: Vec<usize> = (0..n)
        .filter(|&i| matches!(plans[i], Plan::Fresh))
        .collect();
    let k = fresh.len();
    let width = m + k;

    let mut out_center = Array1::zeros(n);
    let mut out_basis = Array2::zeros((n, width));
    for i in 0..n {
        match plans[i] {
            Plan::Constant(v) => out_center[i] = v,
            Plan::Identity => {
                out_center[i] = center[i];
                out_basis
                    .row_mut(i)
                    .slice_mut(ndarray::s![..m])
                    .assign(&basis.row(i));
            }
            Plan::Fresh => {}
        }
    }
    if k == 0 {
        return Star::from_shared(out_center, out_basis, Arc::clone(s.shared_predicate()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut y_lo = Vec::with_capacity(k);
    let mut y_hi = Vec::with_capacity(k);
    for (j, &i) in fresh.iter().enumerate() {
        let y = m + j;
        out_basis[[i, y]] = 1.0;
        let (l, u) = bounds[i];
        let c = center[i];
        let v = basis.row(i);
        // row = a·(v·α) + b·y ≤ rhs
        let mut push = |a: f64, b: f64, r: f64| {
            let mut row = vec![0.0; width];
            for (col, &vc) in v.iter().enumerate() {
                row[col] = a * vc;
            }
            row[y] = b;
            rows.push(row);
            rhs.push(r);
        };
        let f = kinds[i];
        match f {
            ActivationKind::Relu => {
                // y ≥ x
                push(1.0, -1.0, -c);
                // y ≤ u(x − l)/(u − l)
                let lambda = u / (u - l);
                push(-lambda, 1.0, lambda * (c - l));
                y_lo.push(0.0);
                y_hi.push(u);
            }
            ActivationKind::Sigmoid | ActivationKind::Tanh => {
                let (fl, fu) = (f.eval(l), f.eval(u));
                y_lo.push(fl);
                y_hi.push(fu);
                let convex = u <= 0.0;
                let concave = l >= 0.0;
                if mode == SmoothRelaxation::Secant && (convex || concave) && u - l > MIN_CHORD_WIDTH
                {
                    let slope = (fu - fl) / (u - l);
                    // chord: y − slope·x ⋚ fl − slope·l
                    // tangent at t: y − f'(t)·x ⋚ f(t) − f'(t)·t
                    let tangents = [l, u].map(|t| (f.derivative(t), f.eval(t) - f.derivative(t) * t));
                    if convex {
                        push(-slope, 1.0, fl - slope * l + slope * c);
                        for (d, off) in tangents {
                            push(d, -1.0, -off - d * c);
                        }
                    } else {
                        push(slope, -1.0, slope * l - fl - slope * c);
                        for (d, off) in tangents {
                            push(-d, 1.0, off + d * c);
                        }
                    }
                }
            }
        }
    }

    let p = rows.len();
    let rows = Array2::from_shape_vec((p, width), rows.concat()).expect("row layout");
    let predicate = s
        .predicate()
        .with_fresh(&y_lo, &y_hi, rows, Array1::from(rhs))?;
    // the new predicate extends the old one, so it stays in the same space
    Star::from_shared(out_center, out_basis, Arc::new(predicate))
}

/// Exact ReLU image by stepwise sign splits.
fn relu_exact(s: &Star, budget: usize) -> Result<StarUnion> {
    let n = s.dim();
    let mut stars = vec![s.clone()];
    for i in 0..n {
        let mut next = Vec::with_capacity(stars.len());
        for st in stars {
            if st.is_constant_at(i) {
                next.push(if st.center()[i] < 0.0 {
                    zero_coordinate(&st, i)?
                } else {
                    st
                });
            } else {
                let IntervalBox { lower, upper } = st.range_of(Some(&[i]))?;
                let (l, u) = (lower[0], upper[0]);
                if l >= 0.0 {
                    next.push(st);
                } else if u <= 0.0 {
                    next.push(zero_coordinate(&st, i)?);
                } else {
                    let v = st.basis().row(i).to_owned();
                    let c = st.center()[i];
                    let m = st.num_vars();
                    // x_i ≥ 0  ⇔  −v·α ≤ c
                    let pos = restrict(&st, (-&v).into_shape_with_order((1, m)).unwrap(), c)?;
                    // x_i ≤ 0  ⇔  v·α ≤ −c
                    let neg = restrict(&st, v.into_shape_with_order((1, m)).unwrap(), -c)?;
                    next.push(pos);
                    next.push(zero_coordinate(&neg, i)?);
                }
            }
            if next.len() > budget {
                return Err(Error::SplitBudget { budget });
            }
        }
        stars = next;
    }
    StarUnion::new(stars)
}

fn restrict(s: &Star, row: Array2<f64>, rhs: f64) -> Result<Star> {
    let predicate = s.predicate().with_rows(row, Array1::from(vec![rhs]))?;
    Star::from_shared(s.center().clone(), s.basis().clone(), Arc::new(predicate))
}

fn zero_coordinate(s: &Star, i: usize) -> Result<Star> {
    let mut center = s.center().clone();
    let mut basis = s.basis().clone();
    center[i] = 0.0;
    basis.row_mut(i).fill(0.0);
    Star::from_shared(center, basis, Arc::clone(s.shared_predicate()))
}
