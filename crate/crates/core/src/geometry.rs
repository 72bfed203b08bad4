//! Cayley-Menger and Euclidean-distance-matrix determinants, and the
//! general-position test built on them.
//!
//! For `k` points with squared pairwise distances `s_ij`, the Cayley-Menger
//! determinant of the bordered `(k+1) x (k+1)` matrix vanishes exactly when
//! the points fit in dimension `k - 2`; the plain determinant of `[s_ij]`
//! vanishes when they lie on a common sphere of that dimension. In the
//! plane this gives three families over subsets of a labelled configuration:
//! planarity (4-subsets, CM = 0), collinearity (3-subsets, CM != 0) and
//! concyclicity (4-subsets, EDM != 0).
//!
//! Margins are made unit-free by dividing each determinant by `g^p`, where
//! `g` is the geometric mean of the subset's off-diagonal squared distances
//! and `p` the homogeneity degree (`k - 1` for CM, `k` for EDM).

use std::collections::BTreeMap;
use std::ops::{Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::labelcore::LabelMatrix;

/// Field element usable by the elimination-based determinant.
pub trait DetScalar: Clone + Zero + One + Sub<Output = Self> + Mul<Output = Self> {
    fn div(&self, other: &Self) -> Self;
    /// Pivot preference; the largest weight is chosen, zero means unusable.
    fn pivot_weight(&self) -> f64;
    fn negate(&self) -> Self;
}

impl DetScalar for f64 {
    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn pivot_weight(&self) -> f64 {
        self.abs()
    }

    fn negate(&self) -> Self {
        -self
    }
}

impl DetScalar for BigRational {
    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn pivot_weight(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }

    fn negate(&self) -> Self {
        -self.clone()
    }
}

/// Determinant of a row-major `k x k` matrix by Gaussian elimination with
/// full pivoting. Exact for [`BigRational`].
pub fn determinant<T: DetScalar>(k: usize, entries: &[T]) -> T {
    assert_eq!(entries.len(), k * k, "matrix must be square");
    let mut a = entries.to_vec();
    let mut det = T::one();
    for col in 0..k {
        let mut best = (0.0, col, col);
        for r in col..k {
            for c in col..k {
                let w = a[r * k + c].pivot_weight();
                if w > best.0 {
                    best = (w, r, c);
                }
            }
        }
        let (w, pr, pc) = best;
        if w == 0.0 {
            return T::zero();
        }
        if pr != col {
            for c in 0..k {
                a.swap(pr * k + c, col * k + c);
            }
            det = det.negate();
        }
        if pc != col {
            for r in 0..k {
                a.swap(r * k + pc, r * k + col);
            }
            det = det.negate();
        }
        let pivot = a[col * k + col].clone();
        det = det * pivot.clone();
        for r in col + 1..k {
            let factor = a[r * k + col].div(&pivot);
            if factor.is_zero() {
                continue;
            }
            for c in col..k {
                let v = a[r * k + c].clone() - factor.clone() * a[col * k + c].clone();
                a[r * k + c] = v;
            }
        }
    }
    det
}

/// Symmetric matrix of squared pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix<T = f64> {
    size: usize,
    entries: Vec<T>,
}

impl<T: DetScalar> SquaredDistanceMatrix<T> {
    /// Takes full rows; checks shape, symmetry and the zero diagonal.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self>
    where
        T: PartialEq,
    {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(invalid("squared distance matrix must be square"));
        }
        for i in 0..size {
            if !rows[i][i].is_zero() {
                return Err(invalid("squared distance matrix needs a zero diagonal"));
            }
            for j in i + 1..size {
                if rows[i][j] != rows[j][i] {
                    return Err(invalid("squared distance matrix must be symmetric"));
                }
            }
        }
        Ok(SquaredDistanceMatrix { size, entries: rows.into_iter().flatten().collect() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.size).map(<[T]>::to_vec).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(idx.len() * idx.len());
        for &a in idx {
            for &b in idx {
                entries.push(self.get(a, b).clone());
            }
        }
        SquaredDistanceMatrix { size: idx.len(), entries }
    }

    /// Every squared entry multiplied by `t`.
    pub fn scaled(&self, t: &T) -> Self {
        SquaredDistanceMatrix {
            size: self.size,
            entries: self.entries.iter().map(|v| v.clone() * t.clone()).collect(),
        }
    }

    /// The bordered Cayley-Menger matrix, row-major `(k+1) x (k+1)`.
    pub fn cayley_menger(&self) -> Vec<T> {
        let k = self.size;
        let mut out = Vec::with_capacity((k + 1) * (k + 1));
        for i in 0..k {
            out.extend_from_slice(&self.entries[i * k..(i + 1) * k]);
            out.push(T::one());
        }
        out.extend(std::iter::repeat_n(T::one(), k));
        out.push(T::zero());
        out
    }
}

impl SquaredDistanceMatrix<f64> {
    pub fn from_points(points: &[[f64; 2]]) -> Self {
        let k = points.len();
        let mut entries = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let dx = points[i][0] - points[j][0];
                let dy = points[i][1] - points[j][1];
                entries[i * k + j] = dx * dx + dy * dy;
            }
        }
        SquaredDistanceMatrix { size: k, entries }
    }

    /// Geometric mean of the strictly-upper entries.
    pub fn geometric_mean(&self) -> f64 {
        let k = self.size;
        let mut log_sum = 0.0;
        let mut count = 0usize;
        for i in 0..k {
            for j in i + 1..k {
                log_sum += self.get(i, j).ln();
                count += 1;
            }
        }
        if count == 0 {
            return 1.0;
        }
        (log_sum / count as f64).exp()
    }
}

impl SquaredDistanceMatrix<BigRational> {
    pub fn from_points_exact(points: &[(BigRational, BigRational)]) -> Self {
        let k = points.len();
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let dx = &points[i].0 - &points[j].0;
                let dy = &points[i].1 - &points[j].1;
                entries.push(&dx * &dx + &dy * &dy);
            }
        }
        SquaredDistanceMatrix { size: k, entries }
    }

    /// Exact conversion of a float matrix; every finite `f64` is a dyadic
    /// rational.
    pub fn from_f64(m: &SquaredDistanceMatrix<f64>) -> Option<Self> {
        let entries = m.entries.iter().map(|&v| BigRational::from_float(v)).collect::<Option<Vec<_>>>()?;
        Some(SquaredDistanceMatrix { size: m.size, entries })
    }
}

pub fn cm_det<T: DetScalar>(sq: &SquaredDistanceMatrix<T>) -> T {
    determinant(sq.size + 1, &sq.cayley_menger())
}

pub fn edm_det<T: DetScalar>(sq: &SquaredDistanceMatrix<T>) -> T {
    determinant(sq.size, &sq.entries)
}

/// Rational from a small integer, for tests and exact inputs.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_negative(r: &BigRational) -> bool {
    r.is_negative()
}

/// Positive distance value per label; label 1 is pinned to 1. Serializes as
/// the list `[d_1, d_2, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DistanceAssignment {
    /// values[k - 1] is the length of label k.
    values: Vec<f64>,
}

impl DistanceAssignment {
    /// `rest` holds d_2, ..., d_{n-1}; d_1 = 1 is implied.
    pub fn new(rest: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(rest.len() + 1);
        values.push(1.0);
        values.extend_from_slice(rest);
        Self::from_values(values)
    }

    /// `values` holds d_1, ..., d_{n-1}; d_1 must equal 1.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(invalid("distance assignment must pin d_1 = 1"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(invalid(format!("distance values must be positive and finite, got {v}")));
        }
        Ok(DistanceAssignment { values })
    }

    pub fn get(&self, label: u8) -> Result<f64> {
        usize::from(label)
            .checked_sub(1)
            .and_then(|i| self.values.get(i))
            .copied()
            .ok_or(Error::MissingLabel(label))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label_count(&self) -> usize {
        self.values.len()
    }

    /// Smallest relative gap `|d_a - d_b| / max(d_a, d_b)` over label pairs;
    /// infinity for a single label.
    pub fn min_relative_gap(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).map(|w| (w[1] - w[0]) / w[1]).fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for DistanceAssignment {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::from_values(values)
    }
}

impl From<DistanceAssignment> for Vec<f64> {
    fn from(a: DistanceAssignment) -> Self {
        a.values
    }
}

pub fn squared_distances(
    m: &LabelMatrix,
    a: &DistanceAssignment,
    subset: &[usize],
) -> Result<SquaredDistanceMatrix<f64>> {
    if let Some(&i) = subset.iter().find(|&&i| i >= m.n()) {
        return Err(invalid(format!("index {i} out of range for {} points", m.n())));
    }
    let k = subset.len();
    let mut entries = vec![0.0; k * k];
    for (r, &i) in subset.iter().enumerate() {
        for (c, &j) in subset.iter().enumerate() {
            if i != j {
                let d = a.get(m.get(i, j))?;
                entries[r * k + c] = d * d;
            }
        }
    }
    Ok(SquaredDistanceMatrix { size: k, entries })
}

/// Normalized |CM det|, `0` when a squared distance is not positive.
pub fn normalized_cm(sq: &SquaredDistanceMatrix<f64>) -> f64 {
    normalized(sq, cm_det(sq), sq.size().saturating_sub(1))
}

/// Normalized |EDM det|.
pub fn normalized_edm(sq: &SquaredDistanceMatrix<f64>) -> f64 {
    normalized(sq, edm_det(sq), sq.size())
}

fn normalized(sq: &SquaredDistanceMatrix<f64>, det: f64, degree: usize) -> f64 {
    let g = sq.geometric_mean();
    if !(g > 0.0 && g.is_finite()) {
        return 0.0;
    }
    let v = det.abs() / g.powi(degree as i32);
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

/// Point subset, 0-based, sorted. Serializes as a 1-based "1,2,4,5" key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Subset(pub Vec<usize>);

impl Subset {
    pub fn key(&self) -> String {
        self.0.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionMargins {
    pub dim: usize,
    /// (dim+2)-subsets; normalized |CM det|, must vanish.
    pub planarity_residuals: BTreeMap<Subset, f64>,
    /// (dim+1)-subsets; normalized |CM det|, must stay away from 0.
    pub collinearity_margins: BTreeMap<Subset, f64>,
    /// (dim+2)-subsets; normalized |EDM det|, must stay away from 0.
    pub concyclicity_margins: BTreeMap<Subset, f64>,
}

impl PositionMargins {
    pub fn max_planarity(&self) -> f64 {
        self.planarity_residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn min_collinearity(&self) -> f64 {
        self.collinearity_margins.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_concyclicity(&self) -> f64 {
        self.concyclicity_margins.values().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn general_position_margins(m: &LabelMatrix, a: &DistanceAssignment, dim: usize) -> Result<PositionMargins> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let all: Vec<usize> = (0..m.n()).collect();
    let sq = squared_distances(m, a, &all)?;
    Ok(margins_from_squared(&sq, dim))
}

/// Margins for an arbitrary squared-distance matrix (e.g. one computed from
/// coordinates).
pub fn margins_from_squared(sq: &SquaredDistanceMatrix<f64>, dim: usize) -> PositionMargins {
    let n = sq.size();
    let mut planarity_residuals = BTreeMap::new();
    let mut concyclicity_margins = BTreeMap::new();
    for s in subsets(n, dim + 2) {
        let block = sq.subset(&s);
        planarity_residuals.insert(Subset(s.clone()), normalized_cm(&block));
        concyclicity_margins.insert(Subset(s), normalized_edm(&block));
    }
    let collinearity_margins = subsets(n, dim + 1)
        .into_iter()
        .map(|s| {
            let v = normalized_cm(&sq.subset(&s));
            (Subset(s), v)
        })
        .collect();
    PositionMargins { dim, planarity_residuals, collinearity_margins, concyclicity_margins }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// planarity residuals must be at most this
    pub zero: f64,
    /// collinearity and concyclicity margins must be at least this
    pub margin: f64,
    /// distinct labels must differ by at least this relative gap
    pub distinct: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { zero: 1e-9, margin: 1e-6, distinct: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Planarity,
    Collinearity,
    Concyclicity,
    DistinctDistances,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub failing_subset: Option<Subset>,
    pub reason: Option<Condition>,
    /// Offending normalized value when `ok` is false.
    pub value: Option<f64>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict { ok: true, failing_subset: None, reason: None, value: None }
    }

    fn fail(reason: Condition, subset: Option<Subset>, value: f64) -> Self {
        Verdict { ok: false, failing_subset: subset, reason: Some(reason), value: Some(value) }
    }
}

/// Judges margins: planarity first, then collinearity, then concyclicity,
/// each in subset order.
pub fn judge_margins(margins: &PositionMargins, tol: &Tolerances) -> Verdict {
    if let Some((s, &v)) = margins.planarity_residuals.iter().find(|(_, &v)| !(v <= tol.zero)) {
        return Verdict::fail(Condition::Planarity, Some(s.clone()), v);
    }
    if let Some((s, &v)) = margins.collinearity_margins.iter().find(|(_, &v)| !(v >= tol.margin)) {
        return Verdict::fail(Condition::Collinearity, Some(s.clone()), v);
    }
    if let Some((s, &v)) = margins.concyclicity_margins.iter().find(|(_, &v)| !(v >= tol.margin)) {
        return Verdict::fail(Condition::Concyclicity, Some(s.clone()), v);
    }
    Verdict::pass()
}

pub fn verify_realizable(m: &LabelMatrix, a: &DistanceAssignment, tol: &Tolerances, dim: usize) -> Result<Verdict> {
    if a.label_count() + 1 < m.n() {
        return Err(Error::MissingLabel(a.label_count() as u8 + 1));
    }
    let gap = a.min_relative_gap();
    if !(gap >= tol.distinct) {
        return Ok(Verdict::fail(Condition::DistinctDistances, None, gap));
    }
    let margins = general_position_margins(m, a, dim)?;
    Ok(judge_margins(&margins, tol))
}
