//! Label matrices and exhaustive enumeration of crescent labelings.
//!
//! A crescent configuration on `n` points uses `n - 1` distinct distances,
//! the `k`-th of which occurs exactly `k` times. Every such configuration is
//! described by a symmetric [`LabelMatrix`] whose off-diagonal cell `(i, j)`
//! names the distance class of the edge `{i, j}`. The stream produced by
//! [`enumerate_matrices`] threads each distinct ordering of the edge multiset
//! through the upper triangle, in lexicographic order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Distance label `k`, standing for the distance that occurs exactly `k` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabel(u8);

impl EdgeLabel {
    pub fn new(value: u8, n: usize) -> Result<Self> {
        if value == 0 || usize::from(value) >= n {
            return Err(invalid(format!("label {value} outside [1, {}]", n.saturating_sub(1))));
        }
        Ok(EdgeLabel(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// Multiplicity of every label: label `k` occurs `k` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMultiset {
    counts: Vec<(u8, usize)>,
}

impl EdgeMultiset {
    pub fn counts(&self) -> &[(u8, usize)] {
        &self.counts
    }

    pub fn count(&self, label: u8) -> usize {
        self.counts
            .iter()
            .find(|(l, _)| *l == label)
            .map_or(0, |(_, c)| *c)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    /// Labels in ascending order, each repeated by its multiplicity. This is
    /// the lexicographically least threading of the multiset.
    pub fn sorted_labels(&self) -> Vec<u8> {
        self.counts
            .iter()
            .flat_map(|&(l, c)| std::iter::repeat_n(l, c))
            .collect()
    }
}

pub fn edge_multiset(n: usize) -> Result<EdgeMultiset> {
    check_n(n)?;
    if n > usize::from(u8::MAX) {
        return Err(invalid(format!("n = {n} too large for 8-bit labels")));
    }
    let counts = (1..n).map(|k| (k as u8, k)).collect();
    Ok(EdgeMultiset { counts })
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!("need at least 3 points, got {n}")));
    }
    Ok(())
}

/// Number of edges of the complete graph on `n` vertices.
pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Number of distinct label matrices on `n` points: the multinomial
/// `(n(n-1)/2)! / (1! 2! ... (n-1)!)`.
///
/// Computed as a product of binomials so intermediate values stay as small
/// as the result allows; overflow of `u128` is reported.
pub fn count_matrices(n: usize) -> Result<u128> {
    check_n(n)?;
    let mut remaining = edge_count(n) as u128;
    let mut total: u128 = 1;
    for k in 1..n as u128 {
        total = total
            .checked_mul(binomial(remaining, k)?)
            .ok_or(Error::Overflow("counting label matrices"))?;
        remaining -= k;
    }
    Ok(total)
}

fn binomial(n: u128, k: u128) -> Result<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul(n - i)
            .ok_or(Error::Overflow("computing a binomial coefficient"))?
            / (i + 1);
    }
    Ok(acc)
}

/// Rearranges `seq` into the next lexicographic permutation. Duplicated
/// values are handled, so iterating from the sorted sequence visits every
/// distinct permutation of a multiset exactly once. Returns `false` (and
/// leaves `seq` untouched) when `seq` is already the last permutation.
pub fn next_permutation<T: Ord>(seq: &mut [T]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

/// Symmetric `n x n` matrix of distance labels with a zero diagonal.
/// Serializes as its canonical text, e.g. `"4 1 2 2 3 3 3"`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct LabelMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl LabelMatrix {
    /// Builds a matrix from its upper triangle (row-major, `i < j`) and checks
    /// every crescent invariant.
    pub fn from_upper(n: usize, upper: &[u8]) -> Result<Self> {
        let m = Self::from_upper_unchecked(n, upper)?;
        m.validate()?;
        Ok(m)
    }

    fn from_upper_unchecked(n: usize, upper: &[u8]) -> Result<Self> {
        check_n(n)?;
        if upper.len() != edge_count(n) {
            return Err(invalid(format!(
                "upper triangle of a {n}x{n} matrix has {} cells, got {}",
                edge_count(n),
                upper.len()
            )));
        }
        let mut entries = vec![0u8; n * n];
        let mut cells = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let l = *cells.next().expect("length checked");
                entries[i * n + j] = l;
                entries[j * n + i] = l;
            }
        }
        Ok(LabelMatrix { n, entries })
    }

    /// Builds a matrix from full rows; the rows must already be symmetric.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        check_n(n)?;
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("rows must form a square matrix"));
        }
        let entries: Vec<u8> = rows.iter().flatten().copied().collect();
        let m = LabelMatrix { n, entries };
        m.validate()?;
        Ok(m)
    }

    /// Checks symmetry, zero diagonal, label range and multiplicities.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let mut seen = vec![0usize; n];
        for i in 0..n {
            if self.get(i, i) != 0 {
                return Err(invalid(format!("diagonal entry ({i}, {i}) is not 0")));
            }
            for j in i + 1..n {
                let l = self.get(i, j);
                if l != self.get(j, i) {
                    return Err(invalid(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
                EdgeLabel::new(l, n)?;
                seen[usize::from(l)] += 1;
            }
        }
        for (k, &count) in seen.iter().enumerate().skip(1) {
            if count != k {
                return Err(invalid(format!("label {k} occurs {count} times, expected {k}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Label of edge `{i, j}` (0-based); 0 on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn upper_triangle(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(edge_count(self.n));
        for i in 0..self.n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }

    /// Edges `(i, j, label)` with `i < j`, in upper-triangle order.
    pub fn edges(&self) -> Vec<(usize, usize, u8)> {
        let mut out = Vec::with_capacity(edge_count(self.n));
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push((i, j, self.get(i, j)));
            }
        }
        out
    }

    /// Relabels points: entry `(i, j)` of the result is entry
    /// `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_subset(self.n, perm)?;
        if perm.len() != self.n {
            return Err(invalid("permutation must cover every point"));
        }
        let n = self.n;
        let mut entries = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Ok(LabelMatrix { n, entries })
    }

    /// Rows and columns restricted to `subset` (0-based, distinct, in the
    /// given order).
    pub fn principal_submatrix(&self, subset: &[usize]) -> Result<LabelBlock> {
        check_subset(self.n, subset)?;
        Ok(self.block_unchecked(subset))
    }

    pub(crate) fn block_unchecked(&self, subset: &[usize]) -> LabelBlock {
        let k = subset.len();
        let mut entries = Vec::with_capacity(k * k);
        for &a in subset {
            for &b in subset {
                entries.push(self.get(a, b));
            }
        }
        LabelBlock { size: k, entries }
    }

    /// Canonical text form: `n` followed by the upper triangle, space
    /// separated, newline terminated.
    pub fn canonical_text(&self) -> String {
        let mut s = self.to_string();
        s.push('\n');
        s
    }
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(invalid(format!("index {i} out of range for {n} points")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(invalid(format!("index {i} repeated")));
        }
    }
    Ok(())
}

impl PartialOrd for LabelMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Matrices of the same size compare lexicographically on the upper
/// triangle, which is the enumeration order.
impl Ord for LabelMatrix {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.upper_triangle().cmp(&other.upper_triangle()))
    }
}

impl fmt::Display for LabelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)?;
        for l in self.upper_triangle() {
            write!(f, " {l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LabelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabelMatrix({self})")
    }
}

impl From<LabelMatrix> for String {
    fn from(m: LabelMatrix) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for LabelMatrix {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for LabelMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut nums = s.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("not an integer: {t:?}")))
        });
        let n = nums.next().ok_or_else(|| Error::Parse("empty matrix text".into()))??;
        let upper = nums
            .map(|v| v.and_then(|v| u8::try_from(v).map_err(|_| Error::Parse(format!("label {v} too large")))))
            .collect::<Result<Vec<u8>>>()?;
        LabelMatrix::from_upper(n, &upper)
    }
}

/// Principal block of a label matrix. Blocks are symmetric with a zero
/// diagonal but carry no multiplicity constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelBlock {
    size: usize,
    entries: Vec<u8>,
}

impl LabelBlock {
    /// Checks that `rows` is square, symmetric and zero on the diagonal.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(invalid("rows must form a square matrix"));
        }
        for i in 0..size {
            if rows[i][i] != 0 {
                return Err(invalid(format!("diagonal entry ({i}, {i}) is not 0")));
            }
            for j in i + 1..size {
                if rows[i][j] != rows[j][i] {
                    return Err(invalid(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(LabelBlock { size, entries: rows.iter().flatten().copied().collect() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.size).map(<[u8]>::to_vec).collect()
    }

    /// Sorted off-diagonal labels of row `i`.
    pub fn row_multiset(&self, i: usize) -> Vec<u8> {
        let mut r: Vec<u8> = (0..self.size).filter(|&j| j != i).map(|j| self.get(i, j)).collect();
        r.sort_unstable();
        r
    }
}

/// Lexicographic stream of every crescent label matrix on `n` points.
#[derive(Debug, Clone)]
pub struct MatrixStream {
    n: usize,
    current: Option<Vec<u8>>,
    /// Number of leading cells that must stay fixed (partitioned streams).
    pinned: usize,
    pinned_prefix: Vec<u8>,
}

impl MatrixStream {
    /// Counts the remaining sequences without materializing matrices.
    pub fn count_remaining(mut self) -> u64 {
        let Some(cur) = self.current.as_mut() else {
            return 0;
        };
        let mut count = 1u64;
        while next_permutation(cur) && cur[..self.pinned] == self.pinned_prefix[..] {
            count += 1;
        }
        self.current = None;
        count
    }

    fn next_sequence(&mut self) -> Option<Vec<u8>> {
        let cur = self.current.as_mut()?;
        let out = cur.clone();
        let more = next_permutation(cur) && cur[..self.pinned] == self.pinned_prefix[..];
        if !more {
            self.current = None;
        }
        Some(out)
    }
}

impl Iterator for MatrixStream {
    type Item = LabelMatrix;

    fn next(&mut self) -> Option<LabelMatrix> {
        let seq = self.next_sequence()?;
        Some(LabelMatrix::from_upper_unchecked(self.n, &seq).expect("stream yields valid sizes"))
    }
}

pub fn enumerate_matrices(n: usize) -> Result<MatrixStream> {
    let labels = edge_multiset(n)?.sorted_labels();
    Ok(MatrixStream { n, current: Some(labels), pinned: 0, pinned_prefix: Vec::new() })
}

/// Splits the stream into contiguous lexicographic sub-ranges, one per
/// distinct label in the first upper-triangle cell. Concatenating the parts
/// in order reproduces [`enumerate_matrices`] exactly.
pub fn partition_matrices(n: usize) -> Result<Vec<MatrixStream>> {
    let multiset = edge_multiset(n)?;
    let mut parts = Vec::new();
    for &(first, _) in multiset.counts() {
        let mut rest = multiset.sorted_labels();
        let pos = rest.iter().position(|&l| l == first).expect("label present");
        rest.remove(pos);
        let mut seq = vec![first];
        seq.extend(rest);
        parts.push(MatrixStream { n, current: Some(seq), pinned: 1, pinned_prefix: vec![first] });
    }
    Ok(parts)
}
