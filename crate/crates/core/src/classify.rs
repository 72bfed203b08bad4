//! Isomorphism classes by distance set, and the three degenerate-case filters.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelcore::{count_matrices, partition_matrices, LabelBlock, LabelMatrix};

/// Sorted off-diagonal labels of one row: the distances from one point to
/// every other point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistanceCoordinate(Vec<u8>);

impl DistanceCoordinate {
    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    /// Largest number of times a single label repeats in this coordinate.
    pub fn max_multiplicity(&self) -> usize {
        // sorted, so runs are contiguous
        self.0.chunk_by(|a, b| a == b).map(<[u8]>::len).max().unwrap_or(0)
    }
}

impl fmt::Display for DistanceCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// Sorted multiset of all distance coordinates. Two label matrices with the
/// same distance set fall in the same class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistanceSet(Vec<DistanceCoordinate>);

impl DistanceSet {
    pub fn coordinates(&self) -> &[DistanceCoordinate] {
        &self.0
    }
}

impl fmt::Display for DistanceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn distance_set(m: &LabelMatrix) -> DistanceSet {
    let n = m.n();
    let mut coords: Vec<DistanceCoordinate> = (0..n)
        .map(|i| {
            let mut row: Vec<u8> = (0..n).filter(|&j| j != i).map(|j| m.get(i, j)).collect();
            row.sort_unstable();
            DistanceCoordinate(row)
        })
        .collect();
    coords.sort_unstable();
    DistanceSet(coords)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoClass {
    pub class_id: usize,
    #[serde(rename = "distance_set")]
    pub key: DistanceSet,
    pub representative: LabelMatrix,
    pub member_count: u64,
}

#[derive(Default)]
struct Grouping {
    classes: BTreeMap<DistanceSet, (LabelMatrix, u64)>,
    total: u64,
}

impl Grouping {
    fn add(&mut self, m: LabelMatrix) {
        self.total += 1;
        let key = distance_set(&m);
        match self.classes.get_mut(&key) {
            Some((rep, count)) => {
                *count += 1;
                if m < *rep {
                    *rep = m;
                }
            }
            None => {
                self.classes.insert(key, (m, 1));
            }
        }
    }

    fn merge(mut self, other: Grouping) -> Grouping {
        self.total += other.total;
        for (key, (rep, count)) in other.classes {
            match self.classes.get_mut(&key) {
                Some((r, c)) => {
                    *c += count;
                    if rep < *r {
                        *r = rep;
                    }
                }
                None => {
                    self.classes.insert(key, (rep, count));
                }
            }
        }
        self
    }

    fn into_classes(self) -> Vec<IsoClass> {
        let mut classes: Vec<IsoClass> = self
            .classes
            .into_iter()
            .map(|(key, (representative, member_count))| IsoClass { class_id: 0, key, representative, member_count })
            .collect();
        classes.sort_by(|a, b| a.representative.cmp(&b.representative));
        for (i, c) in classes.iter_mut().enumerate() {
            c.class_id = i + 1;
        }
        classes
    }
}

/// Groups matrices by distance set. Classes come back ordered by their
/// (lexicographically least) representative, numbered from 1.
pub fn group_by_distance_set<I>(stream: I) -> Vec<IsoClass>
where
    I: IntoIterator<Item = LabelMatrix>,
{
    let mut g = Grouping::default();
    for m in stream {
        g.add(m);
    }
    g.into_classes()
}

/// Same result as [`group_by_distance_set`] over the full stream, computed on
/// the partitioned stream in parallel. Returns the classes and stream length.
pub fn group_all_parallel(n: usize) -> Result<(Vec<IsoClass>, u64)> {
    let parts = partition_matrices(n)?;
    let g = parts
        .into_par_iter()
        .map(|part| {
            let mut g = Grouping::default();
            for m in part {
                g.add(m);
            }
            g
        })
        .reduce(Grouping::default, Grouping::merge);
    let total = g.total;
    Ok((g.into_classes(), total))
}

/// Some point has four or more points at the same distance, i.e. on one
/// circle around it.
pub fn filter_star(c: &IsoClass) -> bool {
    c.key.coordinates().iter().any(|d| d.max_multiplicity() >= 4)
}

/// Some pair `{i, j}` has three or more apexes `k` with `m[k][i] == m[k][j]`;
/// all apexes then lie on the perpendicular bisector of `ij`.
pub fn filter_shared_base(c: &IsoClass) -> bool {
    shared_base_pair(&c.representative).is_some()
}

pub fn shared_base_pair(m: &LabelMatrix) -> Option<(usize, usize)> {
    let n = m.n();
    for i in 0..n {
        for j in i + 1..n {
            let apexes = (0..n).filter(|&k| k != i && k != j && m.get(k, i) == m.get(k, j)).count();
            if apexes >= 3 {
                return Some((i, j));
            }
        }
    }
    None
}

/// Which isosceles-trapezoid pattern a 4x4 block matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrapezoidPattern {
    /// one distinct row, two distinct labels
    OneRowTwoLabels,
    /// one distinct row, three distinct labels
    OneRowThreeLabels,
    /// two distinct rows (each twice), three labels each used at most 3 times
    TwoRowsThreeLabels,
    /// two distinct rows (each twice), four labels each used at most twice
    TwoRowsFourLabels,
}

pub fn trapezoid_pattern(b: &LabelBlock) -> Option<TrapezoidPattern> {
    if b.size() != 4 {
        return None;
    }
    let mut rows: Vec<Vec<u8>> = (0..4).map(|i| b.row_multiset(i)).collect();
    rows.sort_unstable();

    let mut label_counts: BTreeMap<u8, usize> = BTreeMap::new();
    for i in 0..4 {
        for j in i + 1..4 {
            *label_counts.entry(b.get(i, j)).or_default() += 1;
        }
    }
    let distinct_labels = label_counts.len();
    let max_use = label_counts.values().copied().max().unwrap_or(0);

    let one_row = rows.iter().all(|r| *r == rows[0]);
    let two_pairs = rows[0] == rows[1] && rows[2] == rows[3] && rows[1] != rows[2];

    match (one_row, two_pairs, distinct_labels) {
        (true, _, 2) => Some(TrapezoidPattern::OneRowTwoLabels),
        (true, _, 3) => Some(TrapezoidPattern::OneRowThreeLabels),
        (_, true, 3) if max_use <= 3 => Some(TrapezoidPattern::TwoRowsThreeLabels),
        (_, true, 4) if max_use <= 2 => Some(TrapezoidPattern::TwoRowsFourLabels),
        _ => None,
    }
}

/// First 4-point subset of `m` whose block matches a trapezoid pattern.
pub fn trapezoid_subset(m: &LabelMatrix) -> Option<([usize; 4], TrapezoidPattern)> {
    let n = m.n();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let s = [a, b, c, d];
                    if let Some(p) = trapezoid_pattern(&m.block_unchecked(&s)) {
                        return Some((s, p));
                    }
                }
            }
        }
    }
    None
}

pub fn filter_trapezoid(c: &IsoClass) -> bool {
    trapezoid_subset(&c.representative).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    Star,
    SharedBase,
    Trapezoid,
}

/// Applies the filters in the fixed order star, shared-base, trapezoid and
/// reports the first that fires.
pub fn first_rejection(c: &IsoClass) -> Option<Rejection> {
    if filter_star(c) {
        Some(Rejection::Star)
    } else if filter_shared_base(c) {
        Some(Rejection::SharedBase)
    } else if filter_trapezoid(c) {
        Some(Rejection::Trapezoid)
    } else {
        None
    }
}

/// Enumeration size limit; the pipeline is exponential in `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_n: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_n: 6 }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { max_n: usize::MAX }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            return Err(Error::BudgetExceeded { n, limit: self.max_n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub total_matrices: u64,
    pub class_count: usize,
    pub star_rejected: usize,
    pub shared_base_rejected: usize,
    pub trapezoid_rejected: usize,
    /// `(class_id, filter)` for every rejected class, ids as in the full
    /// class list.
    pub rejections: Vec<(usize, Rejection)>,
    /// Surviving classes, renumbered from 1 in representative order.
    pub surviving_classes: Vec<IsoClass>,
}

impl ClassificationReport {
    pub fn summary(&self) -> String {
        format!(
            "n={}: {} matrices, {} {}, {} surviving",
            self.n,
            self.total_matrices,
            self.class_count,
            if self.class_count == 1 { "class" } else { "classes" },
            self.surviving_classes.len()
        )
    }

    pub fn surviving(&self, class_id: usize) -> Option<&IsoClass> {
        self.surviving_classes.iter().find(|c| c.class_id == class_id)
    }

    /// Surviving class whose distance set equals that of `m`.
    pub fn class_of(&self, m: &LabelMatrix) -> Option<&IsoClass> {
        let key = distance_set(m);
        self.surviving_classes.iter().find(|c| c.key == key)
    }
}

pub fn classify_pipeline(n: usize, budget: &Budget) -> Result<ClassificationReport> {
    budget.check(n)?;
    let expected = count_matrices(n)?;
    let (classes, total) = group_all_parallel(n)?;
    debug_assert_eq!(u128::from(total), expected);

    let mut report = ClassificationReport {
        n,
        total_matrices: total,
        class_count: classes.len(),
        star_rejected: 0,
        shared_base_rejected: 0,
        trapezoid_rejected: 0,
        rejections: Vec::new(),
        surviving_classes: Vec::new(),
    };
    let verdicts: Vec<Option<Rejection>> = classes.par_iter().map(first_rejection).collect();
    for (class, verdict) in classes.into_iter().zip(verdicts) {
        match verdict {
            Some(r) => {
                match r {
                    Rejection::Star => report.star_rejected += 1,
                    Rejection::SharedBase => report.shared_base_rejected += 1,
                    Rejection::Trapezoid => report.trapezoid_rejected += 1,
                }
                report.rejections.push((class.class_id, r));
            }
            None => report.surviving_classes.push(class),
        }
    }
    for (i, c) in report.surviving_classes.iter_mut().enumerate() {
        c.class_id = i + 1;
    }
    Ok(report)
}
