use crescent_core::rigidity::{rigidity_report, s_allowed, Framework, DEFAULT_RANK_TOL};
use proptest::prelude::*;

fn transform(pts: &[[f64; 2]], angle: f64, shift: [f64; 2], scale: f64) -> Vec<[f64; 2]> {
    let (s, c) = angle.sin_cos();
    pts.iter()
        .map(|p| [scale * (c * p[0] - s * p[1]) + shift[0], scale * (s * p[0] + c * p[1]) + shift[1]])
        .collect()
}

fn points(n: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| [x, y]), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ranks_survive_similarity_transforms(
        pts in (3usize..=6).prop_flat_map(points),
        angle in -std::f64::consts::PI..std::f64::consts::PI,
        shift in (-100.0..100.0f64, -100.0..100.0f64),
        scale in 0.1..10.0f64,
    ) {
        let a = rigidity_report(&Framework::complete(&pts).unwrap(), 0, DEFAULT_RANK_TOL);
        let moved = transform(&pts, angle, [shift.0, shift.1], scale);
        let b = rigidity_report(&Framework::complete(&moved).unwrap(), 0, DEFAULT_RANK_TOL);
        prop_assert_eq!(a.rank, b.rank);
        prop_assert_eq!(&a.deletion_ranks, &b.deletion_ranks);
        prop_assert_eq!(a.unique_realization, b.unique_realization);
    }

    #[test]
    fn generic_complete_graphs_reach_the_bound(pts in (4usize..=6).prop_flat_map(points)) {
        let n = pts.len();
        let r = rigidity_report(&Framework::complete(&pts).unwrap(), 0, DEFAULT_RANK_TOL);
        prop_assert!(r.rank <= s_allowed(n, 2));
        prop_assert_eq!(r.deletion_ranks.len(), n * (n - 1) / 2);
        prop_assert_eq!(r.connectivity, n - 1);
    }
}

#[test]
fn oracle_triangles() {
    let h = 3f64.sqrt() / 2.0;
    let eq = rigidity_report(&Framework::complete(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap(), 0, DEFAULT_RANK_TOL);
    assert_eq!((eq.rank, eq.rigid, eq.redundantly_rigid), (3, true, false));
    assert_eq!(eq.deletion_ranks, vec![2, 2, 2]);
    let line = rigidity_report(&Framework::complete(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap(), 0, DEFAULT_RANK_TOL);
    assert_eq!((line.rank, line.rigid), (2, false));
}
