//! Infinitesimal rigidity of bar frameworks.
//!
//! Rank of the rigidity matrix against the maximum `S(n, d)`, single-edge
//! deletions for redundant rigidity, and vertex connectivity by unit-capacity
//! max-flow on the split graph. All verdicts describe the given witness
//! framework; genericity of the witness is not certified.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::solver::Census;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    coordinates: Vec<Vec<f64>>,
    edges: Vec<(usize, usize, u8)>,
    dim: usize,
}

impl Framework {
    pub fn new(coordinates: Vec<Vec<f64>>, edges: Vec<(usize, usize, u8)>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if let Some(p) = coordinates.iter().find(|p| p.len() != dim) {
            return Err(invalid(format!("point {p:?} is not {dim}-dimensional")));
        }
        if coordinates.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        let n = coordinates.len();
        if let Some(&(i, j, _)) = edges.iter().find(|&&(i, j, _)| i >= j || j >= n) {
            return Err(invalid(format!("edge ({i}, {j}) needs i < j < {n}")));
        }
        Ok(Framework { coordinates, edges, dim })
    }

    pub fn planar(points: &[[f64; 2]], edges: Vec<(usize, usize, u8)>) -> Result<Self> {
        Self::new(points.iter().map(|p| p.to_vec()).collect(), edges, 2)
    }

    /// Complete graph on the points, every edge labelled 0.
    pub fn complete(points: &[[f64; 2]]) -> Result<Self> {
        let n = points.len();
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 0))).collect();
        Self::planar(points, edges)
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize, u8)] {
        &self.edges
    }

    pub fn without_edge(&self, k: usize) -> Framework {
        let mut edges = self.edges.clone();
        edges.remove(k);
        Framework { coordinates: self.coordinates.clone(), edges, dim: self.dim }
    }
}

/// One row per edge; `p_i - p_j` in `i`'s column block, `p_j - p_i` in `j`'s.
pub fn rigidity_matrix(f: &Framework) -> DMatrix<f64> {
    let d = f.dim;
    let mut m = DMatrix::zeros(f.edges.len(), f.n() * d);
    for (row, &(i, j, _)) in f.edges.iter().enumerate() {
        for a in 0..d {
            let diff = f.coordinates[i][a] - f.coordinates[j][a];
            m[(row, i * d + a)] = diff;
            m[(row, j * d + a)] = -diff;
        }
    }
    m
}

pub fn s_allowed(n: usize, d: usize) -> usize {
    if n >= d {
        n * d - d * (d + 1) / 2
    } else {
        n * n.saturating_sub(1) / 2
    }
}

/// Singular values above `rel_tol` times the largest.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Edmonds-Karp on a dense capacity matrix.
fn max_flow(cap: &mut [Vec<u32>], s: usize, t: usize, limit: u32) -> u32 {
    let size = cap.len();
    let mut flow = 0;
    while flow < limit {
        let mut parent = vec![usize::MAX; size];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            break;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= 1;
            cap[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
    flow
}

/// Vertex connectivity of the graph on `n` vertices; `n - 1` for complete
/// graphs. Each vertex `v` is split into `v_in = 2v` and `v_out = 2v + 1`
/// joined by a unit arc, so a minimum cut counts vertices.
pub fn vertex_connectivity(n: usize, edges: &[(usize, usize, u8)]) -> usize {
    if n <= 1 {
        return 0;
    }
    let mut adj = vec![vec![false; n]; n];
    for &(i, j, _) in edges {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let big = n as u32;
    let mut best = n - 1;
    for s in 0..n {
        for t in s + 1..n {
            if adj[s][t] {
                continue;
            }
            let mut cap = vec![vec![0u32; 2 * n]; 2 * n];
            for v in 0..n {
                cap[2 * v][2 * v + 1] = if v == s || v == t { big } else { 1 };
            }
            for u in 0..n {
                for v in 0..n {
                    if adj[u][v] {
                        cap[2 * u + 1][2 * v] = big;
                    }
                }
            }
            let k = max_flow(&mut cap, 2 * s + 1, 2 * t, best as u32) as usize;
            best = best.min(k);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub class_id: usize,
    pub n: usize,
    pub dim: usize,
    pub rank: usize,
    pub s_allowed: usize,
    pub rigid: bool,
    pub deletion_ranks: Vec<usize>,
    pub redundantly_rigid: bool,
    pub connectivity: usize,
    pub connectivity_ok: bool,
    pub unique_realization: bool,
    /// Verdicts hold for this witness framework only.
    pub witness_level: bool,
}

pub fn rigidity_report(f: &Framework, class_id: usize, rank_tol: f64) -> RigidityReport {
    let n = f.n();
    let d = f.dim;
    let s = s_allowed(n, d);
    let rank = numeric_rank(&rigidity_matrix(f), rank_tol);
    let deletion_ranks: Vec<usize> =
        (0..f.edges.len()).map(|k| numeric_rank(&rigidity_matrix(&f.without_edge(k)), rank_tol)).collect();
    let rigid = rank == s;
    let redundantly_rigid = !deletion_ranks.is_empty() && deletion_ranks.iter().all(|&r| r == s);
    let connectivity = vertex_connectivity(n, &f.edges);
    let connectivity_ok = connectivity > d;
    RigidityReport {
        class_id,
        n,
        dim: d,
        rank,
        s_allowed: s,
        rigid,
        deletion_ranks,
        redundantly_rigid,
        connectivity,
        connectivity_ok,
        unique_realization: rigid && redundantly_rigid && connectivity_ok,
        witness_level: true,
    }
}

/// One report per realized class, in census order.
pub fn census_rigidity(census: &Census, rank_tol: f64) -> Result<Vec<RigidityReport>> {
    census
        .classes
        .par_iter()
        .filter(|v| v.realizable)
        .map(|v| {
            let coords = v.coordinates.as_ref().ok_or_else(|| invalid(format!("class {} has no coordinates", v.class_id)))?;
            let f = Framework::planar(coords, v.representative.edges())?;
            Ok(rigidity_report(&f, v.class_id, rank_tol))
        })
        .collect()
}
