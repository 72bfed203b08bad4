use crescent_core::classify::distance_set;
use crescent_core::geometry::{verify_realizable, SquaredDistanceMatrix};
use crescent_core::solver::{embed_from_distances, solve_realization, start_rng, LeastSquares, RealizationProblem};
use crescent_core::{enumerate_matrices, IsoClass, LabelMatrix, SolverConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Matrices with known planar witnesses.
const REALIZABLE: [&str; 7] = [
    "4 1 2 2 3 3 3",
    "4 1 2 3 3 2 3",
    "4 1 2 3 2 3 3",
    "5 1 3 2 3 2 4 4 4 3 4",
    "5 1 2 4 4 4 3 4 2 3 3",
    "5 1 2 3 4 2 4 4 3 3 4",
    "5 1 2 2 3 3 4 4 3 4 4",
];

fn class_of(text: &str) -> IsoClass {
    let m: LabelMatrix = text.parse().unwrap();
    IsoClass { class_id: 1, key: distance_set(&m), representative: m, member_count: 1 }
}

fn finite_difference(p: &RealizationProblem, x: &nalgebra::DVector<f64>) -> DMatrix<f64> {
    let r0 = p.residuals(x);
    let mut j = DMatrix::zeros(r0.len(), x.len());
    for k in 0..x.len() {
        let h = 1e-6 * x[k].abs().max(1.0);
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[k] += h;
        xm[k] -= h;
        let col = (p.residuals(&xp) - p.residuals(&xm)) / (2.0 * h);
        j.set_column(k, &col);
    }
    j
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobian_matches_finite_differences(n in 3usize..=5, pick in any::<u64>(), seed in any::<u64>(), start in 0usize..1000) {
        let total = enumerate_matrices(n).unwrap().count_remaining();
        let m = enumerate_matrices(n).unwrap().nth((pick % total) as usize).unwrap();
        let p = RealizationProblem::new(&m).unwrap();
        let x = p.random_start(&SolverConfig::default(), &mut start_rng(seed, 1, start));
        let analytic = p.jacobian(&x);
        let numeric = finite_difference(&p, &x);
        for (a, b) in analytic.iter().zip(numeric.iter()) {
            prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "analytic {a} vs numeric {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn realize_embed_verify_closes(which in 0usize..REALIZABLE.len(), seed in any::<u64>()) {
        let c = class_of(REALIZABLE[which]);
        let cfg = SolverConfig { rng_seed: seed, ..SolverConfig::default() };
        let r = solve_realization(&c, &cfg).unwrap();
        prop_assume!(r.is_some());
        let r = r.unwrap();
        let m = &c.representative;

        let v = verify_realizable(m, &r.assignment, &cfg.tolerances(), 2).unwrap();
        prop_assert!(v.ok, "{v:?}");

        let pts = embed_from_distances(m, &r.assignment).unwrap();
        let sq = SquaredDistanceMatrix::from_points(&pts);
        for (i, j, l) in m.edges() {
            let d = r.assignment.get(l).unwrap();
            prop_assert!((sq.get(i, j).sqrt() - d).abs() <= 1e-8 * d.max(1.0));
        }
        // embedded coordinates rebuild an assignment that verifies again
        let again = SquaredDistanceMatrix::from_points(&r.coordinates);
        for (i, j, _) in m.edges() {
            prop_assert!((again.get(i, j) - sq.get(i, j)).abs() <= 1e-8);
        }
    }
}

#[test]
fn realizable_round_trip_finds_every_known_witness() {
    let cfg = SolverConfig::default();
    for text in REALIZABLE {
        let r = solve_realization(&class_of(text), &cfg).unwrap();
        assert!(r.is_some(), "{text} not realized");
    }
}

#[test]
fn star_matrix_is_not_realized() {
    // point 1 has all four others at distance d4
    let m = LabelMatrix::from_upper(5, &[4, 4, 4, 4, 1, 2, 2, 3, 3, 3]).unwrap();
    let c = IsoClass { class_id: 1, key: distance_set(&m), representative: m, member_count: 1 };
    let cfg = SolverConfig { starts: 40, ..SolverConfig::default() };
    assert!(solve_realization(&c, &cfg).unwrap().is_none());
}
