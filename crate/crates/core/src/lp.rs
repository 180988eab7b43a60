//! Thin LP layer over `minilp`.
//!
//! Everything the star algebra needs reduces to optimising a linear objective
//! over `{α : Cα ≤ d, lo ≤ α ≤ hi}`, optionally with a few extra rows.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Optimality / feasibility tolerance the range engine is calibrated to.
pub const LP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A borrowed polytope `{α : rows·α ≤ rhs, lower ≤ α ≤ upper}` plus optional
/// extra `≤` rows that only live for the duration of one query.
pub struct Polytope<'a> {
    pub rows: ArrayView2<'a, f64>,
    pub rhs: ArrayView1<'a, f64>,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub extra_rows: Option<(&'a Array2<f64>, &'a [f64])>,
}

impl Polytope<'_> {
    // `None` when some all-zero row already reads `0 ≤ b` with `b < 0`.
    fn build(&self, objective: &[f64], sense: Sense) -> Option<Problem> {
        let direction = match sense {
            Sense::Minimize => OptimizationDirection::Minimize,
            Sense::Maximize => OptimizationDirection::Maximize,
        };
        if self.lower.iter().zip(self.upper).any(|(lo, hi)| lo > hi) {
            return None;
        }
        let mut problem = Problem::new(direction);
        let vars: Vec<_> = (0..self.lower.len())
            .map(|j| {
                let coef = objective.get(j).copied().unwrap_or(0.0);
                problem.add_var(coef, (self.lower[j], self.upper[j]))
            })
            .collect();
        let mut consistent = true;
        let mut add_rows = |rows: ArrayView2<f64>, rhs: &[f64]| {
            for (row, &b) in rows.outer_iter().zip(rhs) {
                let terms: Vec<_> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a != 0.0)
                    .map(|(j, &a)| (vars[j], a))
                    .collect();
                if terms.is_empty() {
                    consistent &= b >= -LP_TOL;
                    continue;
                }
                problem.add_constraint(terms.as_slice(), ComparisonOp::Le, b);
            }
        };
        add_rows(self.rows, self.rhs.as_slice().expect("contiguous rhs"));
        if let Some((rows, rhs)) = self.extra_rows {
            add_rows(rows.view(), rhs);
        }
        consistent.then_some(problem)
    }

    /// Optimal objective value of `objective·α` over the polytope.
    pub fn optimize(&self, objective: &[f64], sense: Sense) -> Result<f64> {
        if self.lower.is_empty() {
            return if self.trivially_feasible() {
                Ok(0.0)
            } else {
                Err(Error::EmptyStar)
            };
        }
        let Some(problem) = self.build(objective, sense) else {
            return Err(Error::EmptyStar);
        };
        match problem.solve() {
            Ok(solution) => Ok(solution.objective()),
            Err(minilp::Error::Infeasible) => Err(Error::EmptyStar),
            Err(minilp::Error::Unbounded) => Err(Error::Unbounded),
        }
    }

    /// Returns a feasible point, or `None` when the polytope is empty.
    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        if self.lower.is_empty() {
            return Ok(self.trivially_feasible().then(Vec::new));
        }
        let Some(problem) = self.build(&[], Sense::Minimize) else {
            return Ok(None);
        };
        match problem.solve() {
            Ok(solution) => Ok(Some(solution.iter().map(|(_, &v)| v).collect())),
            Err(minilp::Error::Infeasible) => Ok(None),
            Err(minilp::Error::Unbounded) => Err(Error::Unbounded),
        }
    }

    fn trivially_feasible(&self) -> bool {
        // no variables, so only `0 ≤ b` rows remain
        let base = self.rhs.iter().all(|&b| b >= -LP_TOL);
        let extra = self
            .extra_rows
            .is_none_or(|(_, rhs)| rhs.iter().all(|&b| b >= -LP_TOL));
        base && extra
    }
}
