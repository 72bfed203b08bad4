//! Checking published (matrix, distances) pairs.
//!
//! Fixture file: `{"rows": [{"table_row", "matrix", "closed_form", "values",
//! ...}]}` where `matrix` is canonical text and `values` lists `d_1 = 1,
//! d_2, ...`. Closed-form rows must pass strict verification. Rows printed
//! to a few decimals pass if a solver branch for the matrix agrees within
//! `match_tol`, or else if direct verification passes with the planarity
//! bound widened to `rounded_zero_tol`.

use crescent_core::classify::distance_set;
use crescent_core::geometry::{verify_realizable, Condition, Subset, Verdict};
use crescent_core::solver::solve_branches;
use crescent_core::{DistanceAssignment, IsoClass, LabelMatrix, SolverConfig, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub table_row: usize,
    pub matrix: LabelMatrix,
    pub closed_form: bool,
    pub values: Vec<f64>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    pub rows: Vec<FixtureRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    Strict,
    SolverMatch,
    Widened,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowResult {
    pub table_row: usize,
    pub closed_form: bool,
    pub pass: bool,
    pub path: Path,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<Condition>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failing_subset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    /// Largest deviation from the closest solver branch, when one was sought.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch_deviation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub tolerances: Tolerances,
    pub rounded_zero_tol: f64,
    pub match_tol: f64,
    pub solver: SolverConfig,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            tolerances: Tolerances::default(),
            rounded_zero_tol: 1e-3,
            match_tol: 5e-4,
            solver: SolverConfig::default(),
        }
    }
}

fn with_verdict(mut r: RowResult, v: &Verdict) -> RowResult {
    r.reason = v.reason;
    r.failing_subset = v.failing_subset.as_ref().map(Subset::key);
    r.value = v.value;
    r
}

pub fn check_row(row: &FixtureRow, s: &VerifySettings) -> Result<RowResult, CliError> {
    let a = DistanceAssignment::from_values(row.values.clone())?;
    let base = RowResult {
        table_row: row.table_row,
        closed_form: row.closed_form,
        pass: false,
        path: Path::None,
        reason: None,
        failing_subset: None,
        value: None,
        branch_deviation: None,
    };
    let strict = verify_realizable(&row.matrix, &a, &s.tolerances, 2)?;
    if row.closed_form || strict.ok {
        let path = if strict.ok { Path::Strict } else { Path::None };
        return Ok(with_verdict(RowResult { pass: strict.ok, path, ..base }, &strict));
    }

    let class = IsoClass {
        class_id: row.table_row,
        key: distance_set(&row.matrix),
        representative: row.matrix.clone(),
        member_count: 1,
    };
    let branches = solve_branches(&class, &s.solver, 1e-6)?;
    let deviation = branches
        .iter()
        .map(|b| b.assignment.values().iter().zip(&row.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))));
    let base = RowResult { branch_deviation: deviation, ..base };
    if deviation.is_some_and(|d| d <= s.match_tol) {
        return Ok(RowResult { pass: true, path: Path::SolverMatch, ..base });
    }
    let widened = Tolerances { zero: s.rounded_zero_tol, ..s.tolerances };
    let v = verify_realizable(&row.matrix, &a, &widened, 2)?;
    let path = if v.ok { Path::Widened } else { Path::None };
    Ok(with_verdict(RowResult { pass: v.ok, path, ..base }, &v))
}
