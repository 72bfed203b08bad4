//! Planar realization of label matrices by multistart least squares.
//!
//! Unknowns are gauge-fixed coordinates together with the distance values
//! `d_2, ..., d_{n-1}` (`d_1 = 1`). Each edge `(i, j)` with label `k`
//! contributes the residual `|p_i - p_j|^2 - d_k^2`. Point 1 sits at the
//! origin and point 2 on the x-axis, leaving `2n - 3` coordinate unknowns.

pub mod lm;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_pipeline, Budget, IsoClass};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    margins_from_squared, verify_realizable, DistanceAssignment, PositionMargins, SquaredDistanceMatrix, Tolerances,
};
use crate::labelcore::LabelMatrix;

pub use lm::{LeastSquares, LmOutcome, LmSettings, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub starts: usize,
    pub max_iters: usize,
    /// Bound on the converged sum of squared constraint violations, both
    /// absolute and relative to each `d_k^2`.
    pub residual_tol: f64,
    /// Planarity bound used when re-verifying an accepted assignment.
    pub zero_tol: f64,
    pub margin_tol: f64,
    /// Minimum relative gap between two distance values.
    pub distinct_tol: f64,
    pub rng_seed: u64,
    pub coord_box: f64,
    pub dist_range: (f64, f64),
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            starts: 200,
            max_iters: 500,
            residual_tol: 1e-10,
            zero_tol: 1e-9,
            margin_tol: 1e-6,
            distinct_tol: 1e-4,
            rng_seed: 42,
            coord_box: 2.0,
            dist_range: (0.2, 3.0),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(invalid("starts must be at least 1"));
        }
        let tols = [self.residual_tol, self.zero_tol, self.margin_tol, self.distinct_tol, self.coord_box];
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("tolerances and coord_box must be positive"));
        }
        let (lo, hi) = self.dist_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(invalid("dist_range must satisfy 0 < lo < hi"));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { zero: self.zero_tol, margin: self.margin_tol, distinct: self.distinct_tol }
    }

    fn lm_settings(&self) -> LmSettings {
        LmSettings { max_iters: self.max_iters, ..LmSettings::default() }
    }
}

/// Edge equations of one label matrix in the variable layout
/// `[x_2, x_3, y_3, ..., x_n, y_n, d_2, ..., d_{n-1}]`.
#[derive(Debug, Clone)]
pub struct RealizationProblem {
    n: usize,
    edges: Vec<(usize, usize, u8)>,
}

impl RealizationProblem {
    pub fn new(m: &LabelMatrix) -> Result<Self> {
        if m.n() < 3 {
            return Err(invalid("realization needs at least 3 points"));
        }
        Ok(RealizationProblem { n: m.n(), edges: m.edges() })
    }

    pub fn coord_unknowns(&self) -> usize {
        2 * self.n - 3
    }

    pub fn unknowns(&self) -> usize {
        self.coord_unknowns() + self.n - 2
    }

    /// Column of the coordinate `axis` of point `i`, if it is free.
    fn coord_index(&self, i: usize, axis: usize) -> Option<usize> {
        match (i, axis) {
            (0, _) | (1, 1) => None,
            (1, 0) => Some(0),
            _ => Some(1 + 2 * (i - 2) + axis),
        }
    }

    fn label_index(&self, label: u8) -> Option<usize> {
        (label >= 2).then(|| self.coord_unknowns() + usize::from(label) - 2)
    }

    pub fn points(&self, x: &DVector<f64>) -> Vec<[f64; 2]> {
        (0..self.n)
            .map(|i| {
                let c = |axis| self.coord_index(i, axis).map_or(0.0, |k| x[k]);
                [c(0), c(1)]
            })
            .collect()
    }

    /// `[d_1, ..., d_{n-1}]` as stored, signs included.
    pub fn distances(&self, x: &DVector<f64>) -> Vec<f64> {
        std::iter::once(1.0).chain((self.coord_unknowns()..self.unknowns()).map(|k| x[k])).collect()
    }

    /// Relative violations `(|p_i - p_j|^2 - d^2) / d^2`.
    pub fn relative_residuals(&self, x: &DVector<f64>) -> Vec<f64> {
        let r = self.residuals(x);
        let d = self.distances(x);
        self.edges
            .iter()
            .zip(r.iter())
            .map(|(&(_, _, l), v)| {
                let dl = d[usize::from(l) - 1];
                v / (dl * dl)
            })
            .collect()
    }

    pub fn random_start(&self, cfg: &SolverConfig, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let b = cfg.coord_box;
        let (lo, hi) = cfg.dist_range;
        let coords = (0..self.coord_unknowns()).map(|_| rng.random_range(-b..b));
        let coords: Vec<f64> = coords.collect();
        let dists = (0..self.n - 2).map(|_| rng.random_range(lo..hi));
        DVector::from_iterator(self.unknowns(), coords.into_iter().chain(dists))
    }
}

impl LeastSquares for RealizationProblem {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let p = self.points(x);
        let d = self.distances(x);
        DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().map(|&(i, j, l)| {
                let dx = p[i][0] - p[j][0];
                let dy = p[i][1] - p[j][1];
                let dl = d[usize::from(l) - 1];
                dx * dx + dy * dy - dl * dl
            }),
        )
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let p = self.points(x);
        let mut jac = DMatrix::zeros(self.edges.len(), self.unknowns());
        for (row, &(i, j, l)) in self.edges.iter().enumerate() {
            for axis in 0..2 {
                let diff = 2.0 * (p[i][axis] - p[j][axis]);
                if let Some(k) = self.coord_index(i, axis) {
                    jac[(row, k)] += diff;
                }
                if let Some(k) = self.coord_index(j, axis) {
                    jac[(row, k)] -= diff;
                }
            }
            if let Some(k) = self.label_index(l) {
                jac[(row, k)] = -2.0 * x[k];
            }
        }
        jac
    }
}

/// Independent RNG stream per (seed, class, start): the same start draws the
/// same point whatever the evaluation order.
pub fn start_rng(seed: u64, class_id: usize, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((class_id as u64) << 32) | start as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    pub class_id: usize,
    pub coordinates: Vec<[f64; 2]>,
    pub assignment: DistanceAssignment,
    pub residual: f64,
    pub margins: PositionMargins,
    /// 0-based index of the accepted start.
    pub start_index: usize,
    /// Local dimension of the solution set at the witness: unknowns minus
    /// the numeric rank of the Jacobian. Positive means the witness is one
    /// member of a continuous family.
    pub family_dimension: usize,
}

/// Rigid motion putting point 1 at the origin, point 2 on the positive
/// x-axis and point 3 in the closed upper half-plane.
pub fn gauge_fix(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let Some(&o) = points.first() else {
        return Vec::new();
    };
    let shifted: Vec<[f64; 2]> = points.iter().map(|p| [p[0] - o[0], p[1] - o[1]]).collect();
    let (c, s) = match shifted.get(1) {
        Some(&[x, y]) if x.hypot(y) > 0.0 => (x / x.hypot(y), y / x.hypot(y)),
        _ => (1.0, 0.0),
    };
    let mut out: Vec<[f64; 2]> = shifted.iter().map(|p| [c * p[0] + s * p[1], -s * p[0] + c * p[1]]).collect();
    if let Some(p) = out.get_mut(1) {
        p[1] = 0.0;
    }
    out[0] = [0.0, 0.0];
    if out.get(2).is_some_and(|p| p[1] < 0.0) {
        for p in &mut out {
            p[1] = -p[1];
        }
    }
    out
}

/// Checks one converged start; returns the realization when accepted.
fn accept(
    m: &LabelMatrix,
    problem: &RealizationProblem,
    out: &LmOutcome,
    class_id: usize,
    start_index: usize,
    cfg: &SolverConfig,
) -> Option<Realization> {
    if !(out.cost.is_finite() && out.cost <= cfg.residual_tol) {
        return None;
    }
    let rel: f64 = problem.relative_residuals(&out.x).iter().map(|v| v * v).sum();
    if !(rel <= cfg.residual_tol) {
        return None;
    }
    let values: Vec<f64> = problem.distances(&out.x).into_iter().map(f64::abs).collect();
    let assignment = DistanceAssignment::from_values(values).ok()?;
    if !verify_realizable(m, &assignment, &cfg.tolerances(), 2).ok()?.ok {
        return None;
    }
    let coordinates = gauge_fix(&problem.points(&out.x));
    let margins = margins_from_squared(&SquaredDistanceMatrix::from_points(&coordinates), 2);
    if margins.min_collinearity() < cfg.margin_tol || margins.min_concyclicity() < cfg.margin_tol {
        return None;
    }
    let family_dimension = problem.unknowns() - jacobian_rank(&problem.jacobian(&out.x));
    Some(Realization { class_id, coordinates, assignment, residual: out.cost, margins, start_index, family_dimension })
}

fn run_start(
    m: &LabelMatrix,
    problem: &RealizationProblem,
    class_id: usize,
    start: usize,
    cfg: &SolverConfig,
) -> Option<Realization> {
    let mut rng = start_rng(cfg.rng_seed, class_id, start);
    let x0 = problem.random_start(cfg, &mut rng);
    let out = lm::minimize(problem, x0, &cfg.lm_settings());
    accept(m, problem, &out, class_id, start, cfg)
}

/// First accepted start in index order, or `None` once `cfg.starts` are
/// exhausted. `None` means no witness under this budget, not a proof of
/// non-realizability.
pub fn solve_realization(c: &IsoClass, cfg: &SolverConfig) -> Result<Option<Realization>> {
    cfg.validate()?;
    let problem = RealizationProblem::new(&c.representative)?;
    Ok((0..cfg.starts).find_map(|s| run_start(&c.representative, &problem, c.class_id, s, cfg)))
}

/// Every accepted start, with assignments closer than `dedup_tol` (max-norm)
/// to an earlier one dropped.
pub fn solve_branches(c: &IsoClass, cfg: &SolverConfig, dedup_tol: f64) -> Result<Vec<Realization>> {
    cfg.validate()?;
    let problem = RealizationProblem::new(&c.representative)?;
    let accepted: Vec<Realization> = (0..cfg.starts)
        .into_par_iter()
        .filter_map(|s| run_start(&c.representative, &problem, c.class_id, s, cfg))
        .collect();
    let mut branches: Vec<Realization> = Vec::new();
    for r in accepted {
        let seen = branches.iter().any(|b| {
            let diff = b.assignment.values().iter().zip(r.assignment.values()).map(|(x, y)| (x - y).abs());
            diff.fold(0.0, f64::max) < dedup_tol
        });
        if !seen {
            branches.push(r);
        }
    }
    Ok(branches)
}

/// Classical multidimensional scaling of the squared distances implied by
/// `(m, a)`, returned gauge-fixed.
pub fn embed_from_distances(m: &LabelMatrix, a: &DistanceAssignment) -> Result<Vec<[f64; 2]>> {
    let n = m.n();
    let idx: Vec<usize> = (0..n).collect();
    let sq = crate::geometry::squared_distances(m, a, &idx)?;
    embed_squared(&sq)
}

pub fn embed_squared(sq: &SquaredDistanceMatrix<f64>) -> Result<Vec<[f64; 2]>> {
    let n = sq.size();
    let d = DMatrix::from_fn(n, n, |i, j| *sq.get(i, j));
    let centering = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let gram = -0.5 * &centering * d * &centering;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]].abs();
    let third = order.get(2..).map_or(0.0, |rest| rest.iter().map(|&k| eig.eigenvalues[k].abs()).fold(0.0, f64::max));
    if third > 1e-8 * largest {
        return Err(Error::RankExceedsTwo { third, largest });
    }
    let points: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let coord = |r: usize| {
                order.get(r).map_or(0.0, |&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt())
            };
            [coord(0), coord(1)]
        })
        .collect();
    Ok(gauge_fix(&points))
}

fn jacobian_rank(j: &DMatrix<f64>) -> usize {
    let sv = j.clone().svd(false, false).singular_values;
    let top = sv.max();
    sv.iter().filter(|&&v| v > 1e-8 * top).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class_id: usize,
    pub representative: LabelMatrix,
    pub realizable: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub assignment: Option<DistanceAssignment>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coordinates: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_collinearity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_concyclicity: Option<f64>,
    pub starts_used: usize,
    /// The witness lies on a positive-dimensional solution family.
    pub witness_of_family: bool,
}

impl ClassVerdict {
    fn new(c: &IsoClass, r: Option<Realization>, cfg: &SolverConfig) -> Self {
        let representative = c.representative.clone();
        match r {
            Some(r) => ClassVerdict {
                class_id: c.class_id,
                representative,
                realizable: true,
                min_collinearity: Some(r.margins.min_collinearity()),
                min_concyclicity: Some(r.margins.min_concyclicity()),
                assignment: Some(r.assignment),
                coordinates: Some(r.coordinates),
                residual: Some(r.residual),
                starts_used: r.start_index + 1,
                witness_of_family: r.family_dimension > 0,
            },
            None => ClassVerdict {
                class_id: c.class_id,
                representative,
                realizable: false,
                assignment: None,
                coordinates: None,
                residual: None,
                min_collinearity: None,
                min_concyclicity: None,
                starts_used: cfg.starts,
                witness_of_family: false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub n: usize,
    pub seed: u64,
    pub config: SolverConfig,
    pub surviving_count: usize,
    pub realizable_count: usize,
    pub classes: Vec<ClassVerdict>,
}

impl Census {
    pub fn summary(&self) -> String {
        format!("n={}: {}/{} realizable", self.n, self.realizable_count, self.surviving_count)
    }
}

/// Solves the given classes in parallel; output order follows `classes`.
pub fn census_of(n: usize, classes: &[IsoClass], cfg: &SolverConfig) -> Result<Census> {
    cfg.validate()?;
    let verdicts = classes
        .par_iter()
        .map(|c| Ok(ClassVerdict::new(c, solve_realization(c, cfg)?, cfg)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Census {
        n,
        seed: cfg.rng_seed,
        config: *cfg,
        surviving_count: verdicts.len(),
        realizable_count: verdicts.iter().filter(|v| v.realizable).count(),
        classes: verdicts,
    })
}

pub fn realizable_census(n: usize, cfg: &SolverConfig, budget: &Budget) -> Result<Census> {
    let report = classify_pipeline(n, budget)?;
    census_of(n, &report.surviving_classes, cfg)
}
