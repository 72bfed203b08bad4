//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use crescent_core::classify::distance_set;
use crescent_core::geometry::{cm_det, edm_det, rational, rational_to_f64, verify_realizable, SquaredDistanceMatrix};
use num_rational::BigRational;
use crescent_core::rigidity::{census_rigidity, rigidity_report, s_allowed, Framework, DEFAULT_RANK_TOL};
use crescent_core::solver::{embed_from_distances, solve_realization, start_rng, LeastSquares, RealizationProblem};
use crescent_core::{
    classify_pipeline, count_matrices, enumerate_matrices, realizable_census, Budget, Census, ClassificationReport,
    IsoClass, LabelMatrix, SolverConfig,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde_json::Value;
use tempfile::TempDir;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/table2.json");

const ZERO_TOL: f64 = 1e-9;
const MARGIN_TOL: f64 = 1e-6;
const MATCH_TOL: f64 = 5e-4;
const ROUNDED_ZERO_TOL: f64 = 1e-3;
const PROPERTY_CASES: u32 = 128;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn crescent(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_crescent"))
        .args(args)
        .current_dir(dir)
        .env("CRESCENT_CACHE_DIR", dir.join("cache"))
        .output()
        .expect("binary runs")
}

fn criterion_1() -> Outcome {
    let ((c4, c5, c6), t) = timed(|| (count_matrices(4).unwrap(), count_matrices(5).unwrap(), count_matrices(6).unwrap()));
    let ((s4, s5), ts) = timed(|| {
        (enumerate_matrices(4).unwrap().count_remaining(), enumerate_matrices(5).unwrap().count_remaining())
    });
    let pass = (c4, c5, c6) == (60, 12_600, 37_837_800)
        && (s4, s5) == (60, 12_600)
        && t < Duration::from_secs(1)
        && ts < Duration::from_secs(10);
    outcome(pass, format!("counts {c4}/{c5}/{c6} in {t:?}; streamed {s4}/{s5} in {ts:?}"))
}

struct Pipelines {
    r4: ClassificationReport,
    r5: ClassificationReport,
    t5: Duration,
}

fn criterion_2(p: &Pipelines) -> Outcome {
    let pass = p.r4.class_count == 4 && p.r5.class_count == 85 && p.t5 < Duration::from_secs(30);
    outcome(
        pass,
        format!("classes n=4: {} (want 4), n=5: {} (want 85); n=5 single-threaded in {:?}", p.r4.class_count, p.r5.class_count, p.t5),
    )
}

fn criterion_3(p: &Pipelines) -> Outcome {
    let (s4, s5) = (p.r4.surviving_classes.len(), p.r5.surviving_classes.len());
    outcome(s4 == 3 && s5 == 51, format!("surviving n=4: {s4} (want 3), n=5: {s5} (want 51)"))
}

fn criterion_4(c4: &Census, c5: &Census, t: Duration) -> Outcome {
    let pass = (c4.realizable_count, c4.surviving_count) == (3, 3)
        && (c5.realizable_count, c5.surviving_count) == (27, 51)
        && t < Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "seed 42, 200 starts: {}/{} (want 3/3), {}/{} (want 27/51); n=5 in {t:?}",
            c4.realizable_count, c4.surviving_count, c5.realizable_count, c5.surviving_count
        ),
    )
}

fn criterion_5() -> Outcome {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("verify.json");
    let o = crescent(
        dir.path(),
        &[
            "verify",
            FIXTURES,
            "--zero-tol",
            &ZERO_TOL.to_string(),
            "--margin-tol",
            &MARGIN_TOL.to_string(),
            "--match-tol",
            &MATCH_TOL.to_string(),
            "--rounded-zero-tol",
            &ROUNDED_ZERO_TOL.to_string(),
            "--out",
            out.to_str().unwrap(),
        ],
    );
    let Ok(text) = fs::read_to_string(&out) else {
        return outcome(false, format!("verify wrote no report (exit {:?})", o.status.code()));
    };
    let v: Value = serde_json::from_str(&text).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let closed: Vec<&Value> = rows.iter().filter(|r| r["closed_form"] == true).collect();
    let rounded: Vec<&Value> = rows.iter().filter(|r| r["closed_form"] == false).collect();
    let failed = |rs: &[&Value]| -> Vec<String> {
        rs.iter()
            .filter(|r| r["pass"] != true)
            .map(|r| format!("{}({})", r["table_row"], r["reason"].as_str().unwrap_or("no match")))
            .collect()
    };
    let widened: Vec<String> =
        rounded.iter().filter(|r| r["path"] == "widened").map(|r| r["table_row"].to_string()).collect();
    let (cf, rf) = (failed(&closed), failed(&rounded));
    outcome(
        cf.is_empty() && rf.is_empty(),
        format!(
            "closed form {}/{} strict, failing {:?}; rounded {}/{} within {MATCH_TOL:e} or widened, failing {:?}, widened path {:?}",
            closed.len() - cf.len(),
            closed.len(),
            cf,
            rounded.len() - rf.len(),
            rounded.len(),
            rf,
            widened
        ),
    )
}

fn criterion_6(c4: &Census, c5: &Census) -> Outcome {
    let mut problems = Vec::new();
    if s_allowed(4, 2) != 5 || s_allowed(5, 2) != 7 {
        problems.push("s_allowed".to_string());
    }
    let g4 = census_rigidity(c4, DEFAULT_RANK_TOL).unwrap();
    let g5 = census_rigidity(c5, DEFAULT_RANK_TOL).unwrap();
    if g4.len() != c4.realizable_count || g5.len() != c5.realizable_count {
        problems.push("missing reports".into());
    }
    if !g4.iter().all(|r| r.rank == 5 && r.deletion_ranks.len() == 6) {
        problems.push("n=4 ranks".into());
    }
    if !g5.iter().all(|r| r.rank == 7 && r.deletion_ranks.len() == 10) {
        problems.push("n=5 ranks".into());
    }
    let h = 3f64.sqrt() / 2.0;
    let eq = rigidity_report(&Framework::complete(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap(), 0, DEFAULT_RANK_TOL);
    let line = rigidity_report(&Framework::complete(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap(), 0, DEFAULT_RANK_TOL);
    if eq.rank != 3 || line.rank != 2 {
        problems.push("K3 oracles".into());
    }
    let del4: Vec<String> = g4.iter().map(|r| format!("{}:{:?}", r.class_id, r.deletion_ranks)).collect();
    let redundant5 = g5.iter().filter(|r| r.redundantly_rigid).count();
    outcome(
        problems.is_empty(),
        format!(
            "rank tol {DEFAULT_RANK_TOL:e}; n=4 ranks {:?}, deletion ranks {}; n=5 ranks all 7: {}, redundantly rigid {}/{}; K3 {}/{}{}",
            g4.iter().map(|r| r.rank).collect::<Vec<_>>(),
            del4.join(" "),
            g5.iter().all(|r| r.rank == 7),
            redundant5,
            g5.len(),
            eq.rank,
            line.rank,
            if problems.is_empty() { String::new() } else { format!("; problems {problems:?}") }
        ),
    )
}

fn runner() -> TestRunner {
    let config = Config { cases: PROPERTY_CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner().run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}


fn rational_points(k: usize) -> impl Strategy<Value = Vec<(i64, i64, i64, i64)>> {
    prop::collection::vec((-50i64..50, 1i64..10, -50i64..50, 1i64..10), k)
}

fn exact(pts: &[(i64, i64, i64, i64)]) -> SquaredDistanceMatrix<BigRational> {
    let p: Vec<_> = pts.iter().map(|&(a, b, c, d)| (rational(a, b), rational(c, d))).collect();
    SquaredDistanceMatrix::from_points_exact(&p)
}

fn hadamard_bound(k: usize, entries: &[f64]) -> f64 {
    (0..k).map(|i| entries[i * k..(i + 1) * k].iter().map(|v| v * v).sum::<f64>().sqrt()).product()
}

fn prop_determinants() -> Result<(), String> {
    let points = (3usize..=4).prop_flat_map(|k| (rational_points(k), Just((0..k).collect::<Vec<_>>()).prop_shuffle()));
    check("permutation invariance", points, |(pts, perm)| {
        let moved: Vec<_> = perm.iter().map(|&i| pts[i]).collect();
        let (a, b) = (exact(&pts), exact(&moved));
        prop_assert_eq!(cm_det(&a), cm_det(&b));
        prop_assert_eq!(edm_det(&a), edm_det(&b));
        Ok(())
    })?;
    let scaled = ((3usize..=4).prop_flat_map(rational_points), 1i64..20, 1i64..20);
    check("homogeneity", scaled, |(pts, tn, td)| {
        let k = pts.len() as i32;
        let t = rational(tn, td);
        let a = exact(&pts);
        let b = a.scaled(&t);
        prop_assert_eq!(cm_det(&b), cm_det(&a) * t.pow(k - 1));
        prop_assert_eq!(edm_det(&b), edm_det(&a) * t.pow(k));
        Ok(())
    })?;
    check("heron", (0.5..5.0f64, 0.3..2.8f64, 0.5..5.0f64), |(a, t, r)| {
        let sq = SquaredDistanceMatrix::from_points(&[[0.0, 0.0], [a, 0.0], [r * t.cos(), r * t.sin()]]);
        let area = 0.5 * a * r * t.sin();
        let expected = -16.0 * area * area;
        prop_assert!(((cm_det(&sq) - expected) / expected).abs() <= 1e-10);
        Ok(())
    })?;
    let sym = (3usize..=5, prop::collection::vec(1i64..1000, 10));
    check("exact vs float", sym, |(k, raw)| {
        let mut rows = vec![vec![0.0; k]; k];
        let mut it = raw.iter();
        for i in 0..k {
            for j in i + 1..k {
                let v = *it.next().unwrap() as f64 / 8.0;
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let f = SquaredDistanceMatrix::from_rows(rows).unwrap();
        let e = SquaredDistanceMatrix::<BigRational>::from_f64(&f).unwrap();
        let (xc, xe) = (rational_to_f64(&cm_det(&e)), rational_to_f64(&edm_det(&e)));
        let cs = xc.abs().max(1e-3 * hadamard_bound(k + 1, &f.cayley_menger()));
        let es = xe.abs().max(1e-3 * hadamard_bound(k, &f.rows().concat()));
        prop_assert!((cm_det(&f) - xc).abs() <= 1e-12 * cs);
        prop_assert!((edm_det(&f) - xe).abs() <= 1e-12 * es);
        Ok(())
    })
}

fn prop_rigidity() -> Result<(), String> {
    let pts = (3usize..=6).prop_flat_map(|n| prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), n));
    let motion = (pts, -3.1..3.1f64, -100.0..100.0f64, -100.0..100.0f64, 0.1..10.0f64);
    check("rigidity invariance", motion, |(pts, angle, tx, ty, scale)| {
        let a: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let (s, c) = angle.sin_cos();
        let b: Vec<[f64; 2]> =
            a.iter().map(|p| [scale * (c * p[0] - s * p[1]) + tx, scale * (s * p[0] + c * p[1]) + ty]).collect();
        let ra = rigidity_report(&Framework::complete(&a).unwrap(), 0, DEFAULT_RANK_TOL);
        let rb = rigidity_report(&Framework::complete(&b).unwrap(), 0, DEFAULT_RANK_TOL);
        prop_assert_eq!(ra.rank, rb.rank);
        prop_assert_eq!(ra.deletion_ranks, rb.deletion_ranks);
        Ok(())
    })
}

const WITNESSED: [&str; 5] =
    ["4 1 2 2 3 3 3", "4 1 2 3 3 2 3", "5 1 3 2 3 2 4 4 4 3 4", "5 1 2 4 4 4 3 4 2 3 3", "5 1 2 3 4 2 4 4 3 3 4"];

fn prop_solver() -> Result<(), String> {
    check("round trip", (0..WITNESSED.len(), any::<u64>()), |(w, seed)| {
        let m: LabelMatrix = WITNESSED[w].parse().unwrap();
        let c = IsoClass { class_id: 1, key: distance_set(&m), representative: m.clone(), member_count: 1 };
        let cfg = SolverConfig { rng_seed: seed, ..SolverConfig::default() };
        let Some(r) = solve_realization(&c, &cfg).unwrap() else {
            return Err(TestCaseError::fail("no witness"));
        };
        prop_assert!(verify_realizable(&m, &r.assignment, &cfg.tolerances(), 2).unwrap().ok);
        let pts = embed_from_distances(&m, &r.assignment).unwrap();
        let sq = SquaredDistanceMatrix::from_points(&pts);
        for (i, j, l) in m.edges() {
            let d = r.assignment.get(l).unwrap();
            prop_assert!((sq.get(i, j).sqrt() - d).abs() <= 1e-8 * d.max(1.0));
        }
        Ok(())
    })?;
    let states = (3usize..=5, any::<u64>(), any::<u64>());
    check("jacobian", states, |(n, pick, seed)| {
        let total = enumerate_matrices(n).unwrap().count_remaining();
        let m = enumerate_matrices(n).unwrap().nth((pick % total) as usize).unwrap();
        let p = RealizationProblem::new(&m).unwrap();
        let x = p.random_start(&SolverConfig::default(), &mut start_rng(seed, 1, 0));
        let j = p.jacobian(&x);
        for k in 0..x.len() {
            let h = 1e-6 * x[k].abs().max(1.0);
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let col = (p.residuals(&xp) - p.residuals(&xm)) / (2.0 * h);
            for (r, v) in col.iter().enumerate() {
                let a = j[(r, k)];
                prop_assert!((a - v).abs() <= 1e-6 * a.abs().max(1.0));
            }
        }
        Ok(())
    })
}

fn criterion_7() -> Outcome {
    let results = [prop_determinants(), prop_rigidity(), prop_solver()];
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    outcome(
        failures.is_empty(),
        format!("{PROPERTY_CASES} cases per property, 8 properties; failures {failures:?}"),
    )
}

fn pipeline_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let steps: [&[&str]; 4] = [
        &["classify", "--n", "5", "--no-cache", "--out", "classify.json"],
        &["realize", "--n", "5", "--seed", "42", "--starts", "200", "--out", "census.json"],
        &["rigidity", "census.json", "--out", "rigidity.json"],
        &["render", "census.json", "--out", "svg"],
    ];
    for args in steps {
        let o = crescent(dir, args);
        if !o.status.success() {
            return Err(format!("{args:?} exited {:?}", o.status.code()));
        }
    }
    let mut files = Vec::new();
    for name in ["classify.json", "census.json", "rigidity.json"] {
        files.push((name.to_string(), fs::read(dir.join(name)).map_err(|e| e.to_string())?));
    }
    let mut svgs: Vec<_> = fs::read_dir(dir.join("svg")).map_err(|e| e.to_string())?.flatten().map(|e| e.path()).collect();
    svgs.sort();
    for p in svgs {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        files.push((name, fs::read(&p).map_err(|e| e.to_string())?));
    }
    Ok(files)
}

fn criterion_8() -> Outcome {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    match (pipeline_files(a.path()), pipeline_files(b.path())) {
        (Ok(x), Ok(y)) => {
            let svgs = x.iter().filter(|(n, _)| n.ends_with(".svg")).count();
            let differing: Vec<&String> =
                x.iter().zip(&y).filter(|(p, q)| p != q).map(|(p, _)| &p.0).collect();
            outcome(
                x.len() == y.len() && differing.is_empty(),
                format!("{} artifacts ({svgs} SVG) compared byte for byte; differing {differing:?}", x.len()),
            )
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn main() {
    let (r4, r5, t5) = single_threaded(|| {
        let r4 = classify_pipeline(4, &Budget::default()).unwrap();
        let (r5, t5) = timed(|| classify_pipeline(5, &Budget::default()).unwrap());
        (r4, r5, t5)
    });
    let pipelines = Pipelines { r4, r5, t5 };
    let cfg = SolverConfig { rng_seed: 42, starts: 200, ..SolverConfig::default() };
    let c4 = realizable_census(4, &cfg, &Budget::default()).unwrap();
    let (c5, tc5) = timed(|| realizable_census(5, &cfg, &Budget::default()).unwrap());

    let results = [
        ("enumeration counts", criterion_1()),
        ("class counts", criterion_2(&pipelines)),
        ("filter counts", criterion_3(&pipelines)),
        ("realizable census", criterion_4(&c4, &c5, tc5)),
        ("published distance table", criterion_5()),
        ("rigidity", criterion_6(&c4, &c5)),
        ("property suites", criterion_7()),
        ("determinism", criterion_8()),
    ];
    println!();
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("\nacceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
