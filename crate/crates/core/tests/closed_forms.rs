//! Published closed-form distance assignments, recomputed here from their
//! radical expressions.

use crescent_core::classify::distance_set;
use crescent_core::geometry::{general_position_margins, squared_distances, verify_realizable, Condition};
use crescent_core::solver::{embed_from_distances, solve_branches, solve_realization};
use crescent_core::{DistanceAssignment, IsoClass, LabelMatrix, SolverConfig, Tolerances};

const M7: &str = "5 1 3 2 3 2 4 4 4 3 4";
const M9: &str = "5 1 2 3 4 2 4 4 3 3 4";
const M27: &str = "5 1 2 4 4 4 3 4 2 3 3";
// the printed decimals for table row (4) realize this matrix
const M_ROW4: &str = "5 1 2 3 3 3 4 4 2 4 4";

fn m(text: &str) -> LabelMatrix {
    text.parse().unwrap()
}

fn class(text: &str) -> IsoClass {
    let m = m(text);
    IsoClass { class_id: 1, key: distance_set(&m), representative: m, member_count: 1 }
}

fn a7() -> DistanceAssignment {
    DistanceAssignment::new(&[1.0 / 3f64.sqrt(), (2.0f64 / 3.0).sqrt(), (1.0 + (2.0f64 / 3.0).sqrt()).sqrt()]).unwrap()
}

fn a9() -> DistanceAssignment {
    let s3 = 3f64.sqrt();
    DistanceAssignment::new(&[(2.0 - s3).sqrt(), ((2.0 - s3) / 2.0).sqrt(), 0.5f64.sqrt()]).unwrap()
}

fn a27() -> DistanceAssignment {
    let s7 = 7f64.sqrt();
    DistanceAssignment::new(&[2f64.sqrt(), (2.0 * (3.0 - s7)).sqrt(), (3.0 - s7).sqrt()]).unwrap()
}

#[test]
fn row27_squared_entries() {
    let sq = squared_distances(&m(M27), &a27(), &[0, 1, 2, 3, 4]).unwrap();
    let s7 = 7f64.sqrt();
    let allowed = [1.0, 2.0, 2.0 * (3.0 - s7), 3.0 - s7];
    for i in 0..5 {
        for j in i + 1..5 {
            let v = *sq.get(i, j);
            assert!(allowed.iter().any(|a| (a - v).abs() < 1e-12), "entry {v}");
        }
    }
}

#[test]
fn closed_forms_verify_strictly() {
    let tol = Tolerances::default();
    for (text, a) in [(M7, a7()), (M9, a9()), (M27, a27())] {
        let v = verify_realizable(&m(text), &a, &tol, 2).unwrap();
        assert!(v.ok, "{text}: {v:?}");
    }
}

#[test]
fn row7_margins() {
    let g = general_position_margins(&m(M7), &a7(), 2).unwrap();
    assert!(g.max_planarity() < 1e-9);
    assert!(g.min_collinearity() > 1e-6);
    assert!(g.min_concyclicity() > 1e-6);
}

#[test]
fn perturbed_row7_fails_planarity() {
    let mut v = a7().values().to_vec();
    v[3] += 0.1;
    let a = DistanceAssignment::from_values(v).unwrap();
    let verdict = verify_realizable(&m(M7), &a, &Tolerances::default(), 2).unwrap();
    assert!(!verdict.ok);
    assert_eq!(verdict.reason, Some(Condition::Planarity));
    assert_eq!(verdict.failing_subset.unwrap().0.len(), 4);
}

#[test]
fn row9_embeds_in_the_plane() {
    let mat = m(M9);
    let a = a9();
    let pts = embed_from_distances(&mat, &a).unwrap();
    for (i, j, l) in mat.edges() {
        let d = ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt();
        assert!((d - a.get(l).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn row7_is_on_the_solver_family() {
    // both the published values and the solver witness satisfy d2^2 + d3^2 = 1
    let v = a7();
    let (d2, d3) = (v.get(2).unwrap(), v.get(3).unwrap());
    assert!((d2 * d2 + d3 * d3 - 1.0).abs() < 1e-12);

    let r = solve_realization(&class(M7), &SolverConfig::default()).unwrap().unwrap();
    assert!(r.family_dimension >= 1);
    let (e2, e3) = (r.assignment.get(2).unwrap(), r.assignment.get(3).unwrap());
    assert!((e2 * e2 + e3 * e3 - 1.0).abs() < 1e-8);
}

#[test]
fn row4_decimals_match_a_solver_branch() {
    let target = [1.0, 1.2091, 0.5028, 0.8135];
    let branches = solve_branches(&class(M_ROW4), &SolverConfig::default(), 1e-6).unwrap();
    let best = branches
        .iter()
        .map(|b| b.assignment.values().iter().zip(target).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    assert!(best <= 5e-4, "closest branch deviates by {best}");
}
