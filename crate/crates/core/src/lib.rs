//! Enumeration, classification and planar realization of crescent
//! configurations: `n` points in the plane with `n - 1` distinct pairwise
//! distances, the `k`-th of which occurs exactly `k` times.
//!
//! The pipeline runs bottom-up through the modules: [`labelcore`] enumerates
//! label matrices, [`classify`] groups them by distance set and discards
//! degenerate classes, [`solver`] looks for planar witnesses checked by
//! [`geometry`], and [`rigidity`] analyses the witnesses.

pub mod classify;
pub mod error;
pub mod geometry;
pub mod labelcore;
pub mod rigidity;
pub mod solver;

pub use classify::{classify_pipeline, Budget, ClassificationReport, IsoClass};
pub use error::{Error, Result};
pub use geometry::{DistanceAssignment, Tolerances};
pub use labelcore::{count_matrices, enumerate_matrices, LabelMatrix};
pub use rigidity::{rigidity_report, Framework, RigidityReport};
pub use solver::{realizable_census, Census, SolverConfig};
