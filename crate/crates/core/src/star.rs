//! Generalized star sets `{c + Vα : Cα ≤ d, lo ≤ α ≤ hi}` and the closed
//! operations the reachability passes are built from.
//!
//! A star is an affine image of a polytope over predicate variables `α`.
//! Several stars may share one [`Predicate`] (held behind an `Arc`); they are
//! then affine images of the *same* variables and stay correlated. Relaxations
//! append fresh variables, producing a predicate that [extends](Predicate::extends)
//! the old one, and existing stars are [lifted](Star::lift_to) into it by
//! padding their bases with zero columns.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lp::{Polytope, Sense};

/// Default membership tolerance for [`Star::contains_point`].
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-6;

/// The predicate `{α : Cα ≤ d, lower ≤ α ≤ upper}`.
///
/// Variable bounds are kept apart from the general rows so that dimensions
/// whose support never touches a constrained column get their range in
/// closed form.
///
/// Every predicate also carries the identity of the variable space it was
/// created in. Extensions keep it; independently built predicates never share
/// it, so two stars built separately from equal boxes are not mistaken for
/// correlated ones by [`Star::align`]. Equality compares structure only.
#[derive(Debug, Clone)]
pub struct Predicate {
    constraints: Array2<f64>,
    rhs: Array1<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    space: u64,
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
            && self.upper == other.upper
            && self.rhs == other.rhs
            && self.constraints == other.constraints
    }
}

fn fresh_space() -> u64 {
    static NEXT: AtomicU64 = AtomicU64::new(1);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

impl Predicate {
    pub fn new(
        constraints: Array2<f64>,
        rhs: Array1<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let m = lower.len();
        if upper.len() != m {
            return Err(Error::dim(format!(
                "variable bounds have lengths {} and {}",
                m,
                upper.len()
            )));
        }
        if constraints.ncols() != m {
            return Err(Error::dim(format!(
                "constraint matrix has {} columns, expected {m}",
                constraints.ncols()
            )));
        }
        if constraints.nrows() != rhs.len() {
            return Err(Error::dim(format!(
                "constraint matrix has {} rows but rhs has {} entries",
                constraints.nrows(),
                rhs.len()
            )));
        }
        Ok(Self {
            constraints,
            rhs,
            lower,
            upper,
            space: fresh_space(),
        })
    }

    /// Box predicate `lower ≤ α ≤ upper` with no general rows.
    pub fn from_bounds(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let m = lower.len();
        Self::new(Array2::zeros((0, m)), Array1::zeros(0), lower, upper)
    }

    /// Predicate with no variables: the vacuous predicate of a point.
    pub fn empty_space() -> Self {
        Self {
            constraints: Array2::zeros((0, 0)),
            rhs: Array1::zeros(0),
            lower: Vec::new(),
            upper: Vec::new(),
            space: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn constraint_matrix(&self) -> &Array2<f64> {
        &self.constraints
    }

    pub fn constraint_rhs(&self) -> &Array1<f64> {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn polytope(&self) -> Polytope<'_> {
        Polytope {
            rows: self.constraints.view(),
            rhs: self.rhs.view(),
            lower: &self.lower,
            upper: &self.upper,
            extra_rows: None,
        }
    }

    pub fn is_feasible(&self) -> Result<bool> {
        Ok(self.polytope().feasible_point()?.is_some())
    }

    /// True when `self` is `base` with variables and rows appended: `base`'s
    /// bounds and rows form a prefix and its rows are zero on the new columns.
    pub fn extends(&self, base: &Predicate) -> bool {
        let (m, p) = (base.num_vars(), base.num_rows());
        if self.num_vars() < m || self.num_rows() < p {
            return false;
        }
        self.lower[..m] == base.lower[..]
            && self.upper[..m] == base.upper[..]
            && self.rhs.slice(s![..p]) == base.rhs
            && self.constraints.slice(s![..p, ..m]) == base.constraints
            && self.constraints.slice(s![..p, m..]).iter().all(|&v| v == 0.0)
    }

    /// Appends `k` fresh variables with the given bounds and rows over the
    /// widened space (`rows` must have `num_vars() + k` columns).
    pub fn with_fresh(
        &self,
        lower: &[f64],
        upper: &[f64],
        rows: Array2<f64>,
        rhs: Array1<f64>,
    ) -> Result<Self> {
        let k = lower.len();
        let m = self.num_vars();
        if rows.ncols() != m + k {
            return Err(Error::dim(format!(
                "new rows have {} columns, expected {}",
                rows.ncols(),
                m + k
            )));
        }
        let widened = pad_columns(&self.constraints, m + k);
        let constraints = concatenate(Axis(0), &[widened.view(), rows.view()])
            .expect("row concatenation with equal widths");
        let rhs = concatenate(Axis(0), &[self.rhs.view(), rhs.view()])
            .expect("rhs concatenation");
        let mut lo = self.lower.clone();
        lo.extend_from_slice(lower);
        let mut hi = self.upper.clone();
        hi.extend_from_slice(upper);
        Ok(Self {
            space: self.space,
            ..Self::new(constraints, rhs, lo, hi)?
        })
    }

    /// Conjunction with additional rows over the existing variables.
    pub fn with_rows(&self, rows: Array2<f64>, rhs: Array1<f64>) -> Result<Self> {
        self.with_fresh(&[], &[], rows, rhs)
    }

    /// Block-diagonal conjunction over the concatenated variable vector
    /// `[α_self; α_other]`.
    pub fn block_diagonal(&self, other: &Predicate) -> Self {
        let (m1, m2) = (self.num_vars(), other.num_vars());
        let (p1, p2) = (self.num_rows(), other.num_rows());
        let mut constraints = Array2::zeros((p1 + p2, m1 + m2));
        constraints
            .slice_mut(s![..p1, ..m1])
            .assign(&self.constraints);
        constraints
            .slice_mut(s![p1.., m1..])
            .assign(&other.constraints);
        let rhs = concatenate(Axis(0), &[self.rhs.view(), other.rhs.view()])
            .expect("rhs concatenation");
        let lower = self.lower.iter().chain(&other.lower).copied().collect();
        let upper = self.upper.iter().chain(&other.upper).copied().collect();
        Self {
            constraints,
            rhs,
            lower,
            upper,
            space: fresh_space(),
        }
    }

    /// Whether both predicates descend from the same variable space.
    pub fn same_space(&self, other: &Predicate) -> bool {
        self.space == other.space
    }

    /// No variables and no rows: the predicate of a point.
    pub fn is_trivial(&self) -> bool {
        self.num_vars() == 0 && self.num_rows() == 0
    }

    /// Whether stars over `base` may be lifted into `self`.
    pub fn can_lift(&self, base: &Predicate) -> bool {
        (self.same_space(base) || base.is_trivial()) && self.extends(base)
    }

    /// Columns that appear with a nonzero coefficient in some general row.
    fn constrained_columns(&self) -> Vec<bool> {
        self.constraints
            .axis_iter(Axis(1))
            .map(|col| col.iter().any(|&v| v != 0.0))
            .collect()
    }

    /// Whether `alpha` satisfies the predicate up to `tol`.
    pub fn satisfied_by(&self, alpha: &[f64], tol: f64) -> bool {
        if alpha.len() != self.num_vars() {
            return false;
        }
        let in_bounds = alpha
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&a, (&lo, &hi))| a >= lo - tol && a <= hi + tol);
        in_bounds
            && self
                .constraints
                .outer_iter()
                .zip(self.rhs.iter())
                .all(|(row, &b)| row.iter().zip(alpha).map(|(r, a)| r * a).sum::<f64>() <= b + tol)
    }

    /// Rejection-samples a feasible `α` from the bounding box of the
    /// variables. Returns `None` after `attempts` misses.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, attempts: usize) -> Option<Vec<f64>> {
        for _ in 0..attempts.max(1) {
            let alpha: Vec<f64> = self
                .lower
                .iter()
                .zip(&self.upper)
                .map(|(&lo, &hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
                .collect();
            if self.satisfied_by(&alpha, 0.0) {
                return Some(alpha);
            }
        }
        None
    }
}

fn pad_columns(m: &Array2<f64>, width: usize) -> Array2<f64> {
    if m.ncols() == width {
        return m.clone();
    }
    let mut out = Array2::zeros((m.nrows(), width));
    out.slice_mut(s![.., ..m.ncols()]).assign(m);
    out
}

/// Per-coordinate interval enclosure `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl IntervalBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dim(format!(
                "interval bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some((index, (&lo, &hi))) = lower
            .iter()
            .zip(&upper)
            .enumerate()
            .find(|(_, (lo, hi))| lo > hi)
        {
            return Err(Error::InvertedBounds {
                index,
                lower: lo,
                upper: hi,
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
    }

    /// Coordinate-wise hull of two boxes.
    pub fn hull(&self, other: &IntervalBox) -> Result<IntervalBox> {
        if self.len() != other.len() {
            return Err(Error::dim("hull of boxes with different lengths"));
        }
        Ok(IntervalBox {
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.min(*b))
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.max(*b))
                .collect(),
        })
    }
}

/// A generalized star set.
#[derive(Debug, Clone)]
pub struct Star {
    center: Array1<f64>,
    basis: Array2<f64>,
    predicate: Arc<Predicate>,
}

impl Star {
    /// Builds a star, rejecting dimension errors and empty predicates.
    pub fn new(center: Array1<f64>, basis: Array2<f64>, predicate: Predicate) -> Result<Self> {
        let star = Self::from_shared(center, basis, Arc::new(predicate))?;
        if !star.predicate.is_feasible()? {
            return Err(Error::EmptyStar);
        }
        Ok(star)
    }

    /// Builds a star over an existing shared predicate. The predicate is
    /// assumed non-empty.
    pub fn from_shared(
        center: Array1<f64>,
        basis: Array2<f64>,
        predicate: Arc<Predicate>,
    ) -> Result<Self> {
        if basis.nrows() != center.len() {
            return Err(Error::dim(format!(
                "basis has {} rows but center has {} entries",
                basis.nrows(),
                center.len()
            )));
        }
        if basis.ncols() != predicate.num_vars() {
            return Err(Error::dim(format!(
                "basis has {} columns but predicate has {} variables",
                basis.ncols(),
                predicate.num_vars()
            )));
        }
        Ok(Self {
            center,
            basis,
            predicate,
        })
    }

    /// The degenerate star holding the single point `x`.
    pub fn point(x: &[f64]) -> Self {
        Self {
            center: Array1::from(x.to_vec()),
            basis: Array2::zeros((x.len(), 0)),
            predicate: Arc::new(Predicate::empty_space()),
        }
    }

    /// The axis-aligned box `[lower, upper]` as a star. Zero-width
    /// coordinates get no predicate variable.
    pub fn from_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        let bounds = IntervalBox::new(lower.to_vec(), upper.to_vec())?;
        let n = bounds.len();
        let center: Array1<f64> = (0..n).map(|i| 0.5 * (lower[i] + upper[i])).collect();
        let varying: Vec<usize> = (0..n).filter(|&i| upper[i] > lower[i]).collect();
        let mut basis = Array2::zeros((n, varying.len()));
        for (j, &i) in varying.iter().enumerate() {
            basis[[i, j]] = 0.5 * (upper[i] - lower[i]);
        }
        let m = varying.len();
        let predicate = Predicate::from_bounds(vec![-1.0; m], vec![1.0; m])?;
        Ok(Self {
            center,
            basis,
            predicate: Arc::new(predicate),
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_vars(&self) -> usize {
        self.basis.ncols()
    }

    pub fn center(&self) -> &Array1<f64> {
        &self.center
    }

    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    pub fn shared_predicate(&self) -> &Arc<Predicate> {
        &self.predicate
    }

    pub fn constraint_matrix(&self) -> &Array2<f64> {
        self.predicate.constraint_matrix()
    }

    pub fn constraint_rhs(&self) -> &Array1<f64> {
        self.predicate.constraint_rhs()
    }

    pub fn alpha_lower(&self) -> &[f64] {
        self.predicate.lower()
    }

    pub fn alpha_upper(&self) -> &[f64] {
        self.predicate.upper()
    }

    /// `c + Vα` for a given assignment of the predicate variables.
    pub fn evaluate(&self, alpha: &[f64]) -> Result<Array1<f64>> {
        if alpha.len() != self.num_vars() {
            return Err(Error::dim(format!(
                "alpha has {} entries, star has {} variables",
                alpha.len(),
                self.num_vars()
            )));
        }
        Ok(&self.center + &self.basis.dot(&ArrayView1::from(alpha)))
    }

    /// True when coordinate `i` is a constant (its basis row is zero).
    pub fn is_constant_at(&self, i: usize) -> bool {
        self.basis.row(i).iter().all(|&v| v == 0.0)
    }

    /// True when the star carries the same predicate as `other`
    /// (pointer-equal or structurally equal).
    pub fn shares_predicate_with(&self, other: &Star) -> bool {
        Arc::ptr_eq(&self.predicate, &other.predicate) || *self.predicate == *other.predicate
    }

    /// Re-expresses the star over a predicate that extends its own.
    pub fn lift_to(&self, predicate: &Arc<Predicate>) -> Result<Star> {
        if Arc::ptr_eq(&self.predicate, predicate) {
            return Ok(self.clone());
        }
        if !predicate.can_lift(&self.predicate) {
            return Err(Error::PredicateMismatch(
                "target predicate does not extend the star's predicate".into(),
            ));
        }
        Ok(Star {
            center: self.center.clone(),
            basis: pad_columns(&self.basis, predicate.num_vars()),
            predicate: Arc::clone(predicate),
        })
    }

    /// Coordinates `range` of the star, over the same predicate.
    pub fn rows(&self, range: std::ops::Range<usize>) -> Star {
        Star {
            center: self.center.slice(s![range.clone()]).to_owned(),
            basis: self.basis.slice(s![range, ..]).to_owned(),
            predicate: Arc::clone(&self.predicate),
        }
    }

    /// Selected coordinates of the star, in the order given.
    pub fn select(&self, dims: &[usize]) -> Star {
        Star {
            center: self.center.select(Axis(0), dims),
            basis: self.basis.select(Axis(0), dims),
            predicate: Arc::clone(&self.predicate),
        }
    }

    /// Vertical concatenation of stars sharing one predicate.
    pub fn stack(parts: &[Star]) -> Result<Star> {
        let first = parts
            .first()
            .ok_or_else(|| Error::dim("cannot stack an empty list of stars"))?;
        if let Some(bad) = parts.iter().position(|p| !p.shares_predicate_with(first)) {
            return Err(Error::PredicateMismatch(format!(
                "star {bad} does not share the first star's predicate"
            )));
        }
        let centers: Vec<_> = parts.iter().map(|p| p.center.view()).collect();
        let bases: Vec<_> = parts.iter().map(|p| p.basis.view()).collect();
        Ok(Star {
            center: concatenate(Axis(0), &centers).expect("center concatenation"),
            basis: concatenate(Axis(0), &bases).expect("basis concatenation"),
            predicate: Arc::clone(&first.predicate),
        })
    }

    /// `{Wx + b : x ∈ self}`, exact.
    pub fn affine_map(&self, weights: &Array2<f64>, bias: &Array1<f64>) -> Result<Star> {
        if weights.ncols() != self.dim() {
            return Err(Error::dim(format!(
                "weight matrix has {} columns, star has dimension {}",
                weights.ncols(),
                self.dim()
            )));
        }
        if bias.len() != weights.nrows() {
            return Err(Error::dim(format!(
                "bias has {} entries, weight matrix has {} rows",
                bias.len(),
                weights.nrows()
            )));
        }
        Ok(Star {
            center: weights.dot(&self.center) + bias,
            basis: weights.dot(&self.basis),
            predicate: Arc::clone(&self.predicate),
        })
    }

    /// `{Wx : x ∈ self}`.
    pub fn linear_map(&self, weights: &Array2<f64>) -> Result<Star> {
        self.affine_map(weights, &Array1::zeros(weights.nrows()))
    }

    /// Minkowski sum over independent variables: `[V_a V_b]` with the
    /// block-diagonal conjunction of both predicates.
    pub fn minkowski_sum(&self, other: &Star) -> Result<Star> {
        if self.dim() != other.dim() {
            return Err(Error::dim(format!(
                "minkowski sum of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let predicate = self.predicate.block_diagonal(&other.predicate);
        Ok(Star {
            center: &self.center + &other.center,
            basis: concatenate(Axis(1), &[self.basis.view(), other.basis.view()])
                .expect("basis concatenation"),
            predicate: Arc::new(predicate),
        })
    }

    /// Sum of two affine images of one variable space: `⟨c_a + c_b, V_a + V_b⟩`.
    pub fn shared_variable_sum(&self, other: &Star) -> Result<Star> {
        if self.dim() != other.dim() {
            return Err(Error::dim(format!(
                "shared sum of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if !self.shares_predicate_with(other) {
            return Err(Error::PredicateMismatch(
                "shared-variable sum needs identical predicates".into(),
            ));
        }
        Ok(Star {
            center: &self.center + &other.center,
            basis: &self.basis + &other.basis,
            predicate: Arc::clone(&self.predicate),
        })
    }

    /// Brings two stars into one variable space. Stars over the same (or a
    /// nested) predicate stay correlated; unrelated predicates are combined
    /// block-diagonally, i.e. treated as independent.
    pub fn align(a: &Star, b: &Star) -> Result<(Star, Star)> {
        let same_space = a.predicate.same_space(&b.predicate);
        if Arc::ptr_eq(&a.predicate, &b.predicate) || (same_space && a.predicate == b.predicate) {
            let b = Star {
                predicate: Arc::clone(&a.predicate),
                ..b.clone()
            };
            return Ok((a.clone(), b));
        }
        if a.predicate.can_lift(&b.predicate) {
            return Ok((a.clone(), b.lift_to(&a.predicate)?));
        }
        if b.predicate.can_lift(&a.predicate) {
            return Ok((a.lift_to(&b.predicate)?, b.clone()));
        }
        let predicate = Arc::new(a.predicate.block_diagonal(&b.predicate));
        let (m1, m2) = (a.num_vars(), b.num_vars());
        let mut basis_a = Array2::zeros((a.dim(), m1 + m2));
        basis_a.slice_mut(s![.., ..m1]).assign(&a.basis);
        let mut basis_b = Array2::zeros((b.dim(), m1 + m2));
        basis_b.slice_mut(s![.., m1..]).assign(&b.basis);
        Ok((
            Star {
                center: a.center.clone(),
                basis: basis_a,
                predicate: Arc::clone(&predicate),
            },
            Star {
                center: b.center.clone(),
                basis: basis_b,
                predicate,
            },
        ))
    }

    /// Elementwise product relaxation.
    ///
    /// Each coordinate where one operand is constant is multiplied out
    /// exactly. Every other coordinate gets one fresh variable `z` bounded by
    /// the McCormick envelope of `x·y` over `bounds_a × bounds_b`:
    ///
    /// ```text
    /// z ≥ a_lo·y + b_lo·x − a_lo·b_lo      z ≤ a_hi·y + b_lo·x − a_hi·b_lo
    /// z ≥ a_hi·y + b_hi·x − a_hi·b_hi      z ≤ a_lo·y + b_hi·x − a_lo·b_hi
    /// ```
    pub fn hadamard_product(
        &self,
        other: &Star,
        bounds_a: &IntervalBox,
        bounds_b: &IntervalBox,
    ) -> Result<Star> {
        let n = self.dim();
        if other.dim() != n || bounds_a.len() != n || bounds_b.len() != n {
            return Err(Error::dim(format!(
                "hadamard product of dimensions {}, {} with enclosures {}, {}",
                n,
                other.dim(),
                bounds_a.len(),
                bounds_b.len()
            )));
        }
        let (a, b) = Star::align(self, other)?;
        let m = a.num_vars();

        let relaxed: Vec<usize> = (0..n)
            .filter(|&i| !a.is_constant_at(i) && !b.is_constant_at(i))
            .collect();
        let k = relaxed.len();
        let width = m + k;

        let mut center = Array1::zeros(n);
        let mut basis = Array2::zeros((n, width));
        for i in 0..n {
            if a.is_constant_at(i) {
                let ca = a.center[i];
                center[i] = ca * b.center[i];
                basis.slice_mut(s![i, ..m]).assign(&(&b.basis.row(i) * ca));
            } else if b.is_constant_at(i) {
                let cb = b.center[i];
                center[i] = cb * a.center[i];
                basis.slice_mut(s![i, ..m]).assign(&(&a.basis.row(i) * cb));
            }
        }

        let mut rows = Array2::zeros((4 * k, width));
        let mut rhs = Array1::zeros(4 * k);
        let mut z_lo = Vec::with_capacity(k);
        let mut z_hi = Vec::with_capacity(k);
        for (j, &i) in relaxed.iter().enumerate() {
            let z = m + j;
            basis[[i, z]] = 1.0;
            let (al, ah) = (bounds_a.lower[i], bounds_a.upper[i]);
            let (bl, bh) = (bounds_b.lower[i], bounds_b.upper[i]);
            let (ca, cb) = (a.center[i], b.center[i]);
            let va = a.basis.row(i);
            let vb = b.basis.row(i);

            // Each envelope line is z ⋚ p·y + q·x − p·q with (p, q) ∈ {(al, bl), (ah, bh)}
            // for the lower side and {(ah, bl), (al, bh)} for the upper side.
            let lines = [(al, bl, -1.0), (ah, bh, -1.0), (ah, bl, 1.0), (al, bh, 1.0)];
            for (r, &(p, q, side)) in lines.iter().enumerate() {
                let row_idx = 4 * j + r;
                // side = -1: p·y + q·x − p·q − z ≤ 0
                // side = +1: z − p·y − q·x + p·q ≤ 0
                let mut row = rows.row_mut(row_idx);
                let coef = -side;
                for col in 0..m {
                    row[col] = coef * (p * vb[col] + q * va[col]);
                }
                row[z] = side;
                rhs[row_idx] = -coef * (p * cb + q * ca - p * q);
            }

            let corners = [al * bl, al * bh, ah * bl, ah * bh];
            z_lo.push(corners.iter().copied().fold(f64::INFINITY, f64::min));
            z_hi.push(corners.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }

        let predicate = if k == 0 {
            Arc::clone(&a.predicate)
        } else {
            Arc::new(a.predicate.with_fresh(&z_lo, &z_hi, rows, rhs)?)
        };
        Ok(Star {
            center,
            basis,
            predicate,
        })
    }

    /// Exact per-coordinate range over the predicate. Coordinates whose
    /// support avoids every constrained column are computed in closed form;
    /// the rest by one LP per bound.
    pub fn range_of(&self, dims: Option<&[usize]>) -> Result<IntervalBox> {
        let all: Vec<usize>;
        let dims = match dims {
            Some(d) => {
                if let Some(&bad) = d.iter().find(|&&i| i >= self.dim()) {
                    return Err(Error::dim(format!(
                        "range query for dimension {bad} of a {}-dimensional star",
                        self.dim()
                    )));
                }
                d
            }
            None => {
                all = (0..self.dim()).collect();
                &all
            }
        };

        let pred = &*self.predicate;
        if pred.lower.iter().zip(&pred.upper).any(|(lo, hi)| lo > hi) {
            return Err(Error::EmptyStar);
        }
        let constrained = pred.constrained_columns();
        let polytope = pred.polytope();
        let mut lower = Vec::with_capacity(dims.len());
        let mut upper = Vec::with_capacity(dims.len());
        let mut solved_lp = false;
        for &i in dims {
            let row = self.basis.row(i);
            let closed_form = row
                .iter()
                .zip(&constrained)
                .all(|(&v, &c)| v == 0.0 || !c);
            let c = self.center[i];
            if closed_form {
                let (mut lo, mut hi) = (c, c);
                for (j, &v) in row.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let (a, b) = (v * pred.lower[j], v * pred.upper[j]);
                    lo += a.min(b);
                    hi += a.max(b);
                }
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Unbounded);
                }
                lower.push(lo);
                upper.push(hi);
            } else {
                solved_lp = true;
                let objective = row.to_vec();
                let lo = c + polytope.optimize(&objective, Sense::Minimize)?;
                let hi = c + polytope.optimize(&objective, Sense::Maximize)?;
                lower.push(lo);
                upper.push(hi.max(lo));
            }
        }
        // Closed-form bounds skip the rows, so emptiness must be checked once.
        if pred.num_rows() > 0 && !solved_lp && !pred.is_feasible()? {
            return Err(Error::EmptyStar);
        }
        IntervalBox::new(lower, upper)
    }

    pub fn is_empty(&self) -> bool {
        !matches!(self.predicate.is_feasible(), Ok(true))
    }

    /// Whether some feasible `α` gives `‖c + Vα − x‖∞ ≤ tol`.
    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let n = self.dim();
        let mut rows = Array2::zeros((2 * n, self.num_vars()));
        let mut rhs = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.row_mut(i).assign(&self.basis.row(i));
            rhs.push(x[i] - self.center[i] + tol);
        }
        for i in 0..n {
            rows.row_mut(n + i).assign(&(-&self.basis.row(i)));
            rhs.push(self.center[i] - x[i] + tol);
        }
        let polytope = Polytope {
            extra_rows: Some((&rows, &rhs)),
            ..self.predicate.polytope()
        };
        matches!(polytope.feasible_point(), Ok(Some(_)))
    }

    /// Draws a point of the star by rejection-sampling its predicate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, attempts: usize) -> Option<Array1<f64>> {
        let alpha = self.predicate.sample(rng, attempts)?;
        self.evaluate(&alpha).ok()
    }
}

/// A finite union of stars of one dimension.
#[derive(Debug, Clone)]
pub struct StarUnion {
    members: Vec<Star>,
}

impl StarUnion {
    pub fn new(members: Vec<Star>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::dim("a star union needs at least one member"))?;
        let n = first.dim();
        if let Some(bad) = members.iter().position(|s| s.dim() != n) {
            return Err(Error::dim(format!(
                "union member {bad} has dimension {}, expected {n}",
                members[bad].dim()
            )));
        }
        Ok(Self { members })
    }

    pub fn single(star: Star) -> Self {
        Self {
            members: vec![star],
        }
    }

    pub fn members(&self) -> &[Star] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Star> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Coordinate-wise envelope of every member's range.
    pub fn range(&self) -> Result<IntervalBox> {
        let mut ranges = self.members.iter().map(|s| s.range_of(None));
        let first = ranges.next().expect("non-empty union")?;
        ranges.try_fold(first, |acc, r| acc.hull(&r?))
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        self.members.iter().any(|s| s.contains_point(x, tol))
    }
}
