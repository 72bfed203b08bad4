//! `crescent`: enumerate, classify, realize and analyse crescent
//! configurations from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or budget error,
//! 3 I/O error.

mod artifact;
mod cache;
mod error;
mod render;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crescent_core::labelcore::{count_matrices, partition_matrices};
use crescent_core::rigidity::{census_rigidity, RigidityReport, DEFAULT_RANK_TOL};
use crescent_core::solver::{census_of, Census};
use crescent_core::{Budget, ClassificationReport, LabelMatrix, SolverConfig, Tolerances};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use artifact::{display, display_opt, read_json, to_json, write_csv, write_text, Artifact, RunManifest, ToleranceSet};
use cache::Cache;
use error::CliError;
use verify::{check_row, Fixtures, RowResult, VerifySettings};

#[derive(Parser)]
#[command(name = "crescent", version, about = "Crescent configuration census tool")]
struct Cli {
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Embed wall-clock duration in the manifest (breaks byte-identical reruns).
    #[arg(long, global = true)]
    record_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of label matrices on n points.
    Count(CountArgs),
    /// Group label matrices into classes and apply the degeneracy filters.
    Classify(ClassifyArgs),
    /// Search for planar witnesses of the surviving classes.
    Realize(RealizeArgs),
    /// Check (matrix, distances) fixture rows.
    Verify(VerifyArgs),
    /// Rigidity reports for the realized classes of a census.
    Rigidity(RigidityArgs),
    /// One SVG drawing per realized class of a census.
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    n: usize,
    /// Lift the n <= 6 enumeration cap.
    #[arg(long)]
    allow_large: bool,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        if self.allow_large {
            Budget::unlimited()
        } else {
            Budget::default()
        }
    }
}

#[derive(Args)]
struct CacheArgs {
    /// Cache directory (default: $CRESCENT_CACHE_DIR or ./.crescent-cache).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
}

impl CacheArgs {
    fn cache(&self) -> Cache {
        Cache::new((!self.no_cache).then(|| cache::cache_dir(self.cache_dir.as_deref())))
    }
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    budget: BudgetArgs,
    /// Count by full enumeration instead of the closed formula.
    #[arg(long)]
    stream: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    cache: CacheArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    starts: usize,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    residual_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    zero_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    margin_tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    distinct_tol: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            residual_tol: self.residual_tol,
            zero_tol: self.zero_tol,
            margin_tol: self.margin_tol,
            distinct_tol: self.distinct_tol,
            rng_seed: self.seed,
            ..SolverConfig::default()
        }
    }

    fn tolerance_set(&self) -> ToleranceSet {
        ToleranceSet {
            residual: Some(self.residual_tol),
            zero: Some(self.zero_tol),
            margin: Some(self.margin_tol),
            distinct: Some(self.distinct_tol),
            rank: None,
        }
    }
}

#[derive(Args)]
struct RealizeArgs {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    cache: CacheArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Solve only this surviving class (1-based).
    #[arg(long, conflicts_with = "matrix")]
    class_id: Option<usize>,
    /// Solve only the class containing this matrix, given as canonical text
    /// "n u_12 u_13 ... u_(n-1)n".
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Fixture file.
    table: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Planarity bound for rows printed to a few decimals.
    #[arg(long, default_value_t = 1e-3)]
    rounded_zero_tol: f64,
    /// Agreement required between a rounded row and a solver branch.
    #[arg(long, default_value_t = 5e-4)]
    match_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RigidityArgs {
    /// Census JSON written by `realize`.
    census: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct RenderArgs {
    /// Census JSON written by `realize`.
    census: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct VerifyBody {
    rows: Vec<RowResult>,
}

#[derive(Serialize, Deserialize)]
struct RigidityBody {
    reports: Vec<RigidityReport>,
}

struct Run {
    started: Instant,
    record_timing: bool,
}

impl Run {
    fn finish(&self, manifest: &mut RunManifest) {
        let ms = self.started.elapsed().as_secs_f64() * 1e3;
        if self.record_timing {
            manifest.duration_ms = Some(ms);
        }
        eprintln!("{} finished in {ms:.1} ms", manifest.command);
    }
}

fn cmd_count(a: &CountArgs) -> Result<(), CliError> {
    let n = a.budget.n;
    if !a.stream {
        println!("{}", count_matrices(n)?);
        return Ok(());
    }
    a.budget.budget().check(n)?;
    let total: u64 = partition_matrices(n)?.into_par_iter().map(|s| s.count_remaining()).sum();
    println!("{total}");
    Ok(())
}

fn classification_rows(r: &ClassificationReport) -> Vec<Vec<String>> {
    r.surviving_classes
        .iter()
        .map(|c| vec![c.class_id.to_string(), c.representative.to_string(), c.key.to_string(), c.member_count.to_string()])
        .collect()
}

fn cmd_classify(a: &ClassifyArgs, run: &Run) -> Result<(), CliError> {
    let n = a.budget.n;
    let (report, cached) = a.cache.cache().classification(n, &a.budget.budget())?;
    if cached {
        eprintln!("classification for n={n} read from cache");
    }
    println!("{}", report.summary());
    let Some(out) = &a.out else {
        return Ok(());
    };
    let mut manifest = RunManifest::new("classify");
    manifest.n = Some(n);
    manifest.outputs = vec![display(out)];
    run.finish(&mut manifest);
    match a.format {
        Format::Json => write_text(out, &to_json(&Artifact { manifest, body: report })),
        Format::Csv => write_csv(
            out,
            &manifest,
            &["class_id", "representative", "distance_set", "member_count"],
            &classification_rows(&report),
        ),
    }
}

fn census_rows(c: &Census) -> Vec<Vec<String>> {
    c.classes
        .iter()
        .map(|v| {
            let mut row = vec![v.class_id.to_string(), v.representative.to_string(), v.realizable.to_string()];
            for k in 0..c.n - 1 {
                row.push(v.assignment.as_ref().map(|a| a.values()[k].to_string()).unwrap_or_default());
            }
            row.push(v.residual.map(|r| r.to_string()).unwrap_or_default());
            row.push(v.starts_used.to_string());
            row.push(v.witness_of_family.to_string());
            row
        })
        .collect()
}

fn cmd_realize(a: &RealizeArgs, run: &Run) -> Result<(), CliError> {
    let n = a.budget.n;
    let cfg = a.solver.config();
    cfg.validate()?;
    let (report, _) = a.cache.cache().classification(n, &a.budget.budget())?;
    let classes = match (&a.class_id, &a.matrix) {
        (Some(id), _) => {
            let c = report.surviving(*id).ok_or_else(|| {
                CliError::Usage(format!("unknown class id {id}; n={n} has {} surviving classes", report.surviving_classes.len()))
            })?;
            vec![c.clone()]
        }
        (None, Some(text)) => {
            let m: LabelMatrix = text.parse()?;
            if m.n() != n {
                return Err(CliError::Usage(format!("matrix has {} points, expected {n}", m.n())));
            }
            let c = report.class_of(&m).ok_or_else(|| CliError::Usage(format!("matrix {m} is not in a surviving class")))?;
            vec![c.clone()]
        }
        (None, None) => report.surviving_classes.clone(),
    };
    let census = census_of(n, &classes, &cfg)?;
    if classes.len() == 1 {
        let v = &census.classes[0];
        match &v.assignment {
            Some(d) => println!("class {}: d = {:?}", v.class_id, d.values()),
            None => println!("class {}: no witness under budget", v.class_id),
        }
    }
    println!("{}", census.summary());
    let Some(out) = &a.out else {
        return Ok(());
    };
    let mut manifest = RunManifest::new("realize");
    manifest.n = Some(n);
    manifest.seed = Some(cfg.rng_seed);
    manifest.tolerances = a.solver.tolerance_set();
    manifest.outputs = vec![display(out)];
    run.finish(&mut manifest);
    match a.format {
        Format::Json => write_text(out, &to_json(&Artifact { manifest, body: census })),
        Format::Csv => {
            let mut header = vec!["class_id".to_string(), "representative".into(), "realizable".into()];
            header.extend((1..n).map(|k| format!("d{k}")));
            header.extend(["residual".into(), "starts_used".into(), "witness_of_family".into()]);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            write_csv(out, &manifest, &header, &census_rows(&census))
        }
    }
}

fn cmd_verify(a: &VerifyArgs, run: &Run) -> Result<(), CliError> {
    let fixtures: Fixtures = read_json(&a.table)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let settings = VerifySettings {
        tolerances: Tolerances { zero: a.solver.zero_tol, margin: a.solver.margin_tol, distinct: a.solver.distinct_tol },
        rounded_zero_tol: a.rounded_zero_tol,
        match_tol: a.match_tol,
        solver: cfg,
    };
    let rows = fixtures.rows.par_iter().map(|r| check_row(r, &settings)).collect::<Result<Vec<_>, _>>()?;
    for r in &rows {
        let kind = if r.closed_form { "closed form" } else { "rounded" };
        let detail = match (&r.reason, &r.failing_subset) {
            (Some(reason), Some(s)) => format!(" ({reason:?} on {s})"),
            (Some(reason), None) => format!(" ({reason:?})"),
            _ => String::new(),
        };
        println!("row {} [{kind}]: {} via {:?}{detail}", r.table_row, if r.pass { "PASS" } else { "FAIL" }, r.path);
    }
    let closed: Vec<&RowResult> = rows.iter().filter(|r| r.closed_form).collect();
    let closed_ok = closed.iter().filter(|r| r.pass).count();
    let rounded_ok = rows.iter().filter(|r| !r.closed_form && r.pass).count();
    println!(
        "closed-form rows: {closed_ok}/{} pass; rounded rows: {rounded_ok}/{} pass",
        closed.len(),
        rows.len() - closed.len()
    );
    if let Some(out) = &a.out {
        let mut manifest = RunManifest::new("verify");
        manifest.seed = Some(cfg.rng_seed);
        manifest.tolerances = a.solver.tolerance_set();
        manifest.inputs = vec![display(&a.table)];
        manifest.outputs = vec![display(out)];
        run.finish(&mut manifest);
        write_text(out, &to_json(&Artifact { manifest, body: VerifyBody { rows: rows.clone() } }))?;
    }
    if closed_ok < closed.len() {
        return Err(CliError::Failed(format!("{} closed-form row(s) failed", closed.len() - closed_ok)));
    }
    Ok(())
}

fn read_census(path: &Path) -> Result<Artifact<Census>, CliError> {
    read_json(path)
}

fn cmd_rigidity(a: &RigidityArgs, run: &Run) -> Result<(), CliError> {
    let census = read_census(&a.census)?;
    let reports = census_rigidity(&census.body, a.rank_tol)?;
    for r in &reports {
        println!(
            "class {}: rank {}/{}, deletion ranks {:?}, connectivity {}, unique realization {}",
            r.class_id, r.rank, r.s_allowed, r.deletion_ranks, r.connectivity, r.unique_realization
        );
    }
    println!("{} reports", reports.len());
    let Some(out) = &a.out else {
        return Ok(());
    };
    let mut manifest = RunManifest::new("rigidity");
    manifest.n = Some(census.body.n);
    manifest.seed = Some(census.body.seed);
    manifest.tolerances.rank = Some(a.rank_tol);
    manifest.inputs = vec![display(&a.census)];
    manifest.outputs = display_opt(&a.out);
    run.finish(&mut manifest);
    match a.format {
        Format::Json => write_text(out, &to_json(&Artifact { manifest, body: RigidityBody { reports } })),
        Format::Csv => {
            let rows = reports
                .iter()
                .map(|r| {
                    let del: Vec<String> = r.deletion_ranks.iter().map(usize::to_string).collect();
                    vec![
                        r.class_id.to_string(),
                        r.rank.to_string(),
                        r.s_allowed.to_string(),
                        r.rigid.to_string(),
                        del.join(";"),
                        r.redundantly_rigid.to_string(),
                        r.connectivity.to_string(),
                        r.unique_realization.to_string(),
                    ]
                })
                .collect::<Vec<_>>();
            let header = [
                "class_id",
                "rank",
                "s_allowed",
                "rigid",
                "deletion_ranks",
                "redundantly_rigid",
                "connectivity",
                "unique_realization",
            ];
            write_csv(out, &manifest, &header, &rows)
        }
    }
}

fn cmd_render(a: &RenderArgs, run: &Run) -> Result<(), CliError> {
    let census = read_census(&a.census)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let mut written = Vec::new();
    for v in &census.body.classes {
        let Some(svg) = render::render_class(v) else {
            continue;
        };
        let path = a.out.join(format!("class_{}.svg", v.class_id));
        let manifest = RunManifest {
            n: Some(census.body.n),
            seed: Some(census.body.seed),
            inputs: vec![display(&a.census)],
            outputs: vec![display(&path)],
            ..RunManifest::new("render")
        };
        let comment = format!("<!-- manifest: {} -->\n", serde_json::to_string(&manifest).expect("manifest serializes"));
        let text = match svg.split_once('\n') {
            Some((head, rest)) => format!("{head}\n{comment}{rest}"),
            None => svg,
        };
        write_text(&path, &text)?;
        written.push(path);
    }
    let mut manifest = RunManifest::new("render");
    run.finish(&mut manifest);
    println!("wrote {} SVG files to {}", written.len(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let run = Run { started: Instant::now(), record_timing: cli.record_timing };
    let result = match &cli.command {
        Command::Count(a) => cmd_count(a),
        Command::Classify(a) => cmd_classify(a, &run),
        Command::Realize(a) => cmd_realize(a, &run),
        Command::Verify(a) => cmd_verify(a, &run),
        Command::Rigidity(a) => cmd_rigidity(a, &run),
        Command::Render(a) => cmd_render(a, &run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
