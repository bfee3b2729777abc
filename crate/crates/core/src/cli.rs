//! Command-line front end: `gen`, `run`, `verify`, `plot`, `bench`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::document::InstanceDocument;
use crate::error::{invalid, Error, Result};
use crate::harness::experiment::rows_to_csv;
use crate::harness::plot::{aggregate_records, loglog_svg, series_from_rows};
use crate::harness::verify::{verify_document, verify_golden, VERIFY_HORIZON};
use crate::harness::{
    bench, run_seeds, ExperimentConfig, InstanceSource, MenuKind, MenuSpec, PolicySpec, RunRecord, Scenario, Seeds,
};

#[derive(Debug, Parser)]
#[command(name = "incent", version, about = "Learning to incentivize greedy and smooth agents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit an instance document.
    Gen(GenArgs),
    /// Run an experiment and write one record file per seed.
    Run(RunArgs),
    /// Run the invariant suites (on the shipped golden instances by default).
    Verify(VerifyArgs),
    /// Log-log regret SVG plus CSV from record files.
    Plot(PlotArgs),
    /// Regret over a grid of horizons, with a fitted log-log slope.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// example32, hard_b1, hard_b2, smooth_hard, random or gaussian.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of arms.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of agent types.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "T", default_value_t = 1024)]
    pub horizon: u64,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long)]
    pub arm: Option<usize>,
    #[arg(long)]
    pub position: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid: Option<f64>,
    /// Enforce the strict horizon condition of hard_b1.
    #[arg(long)]
    pub strict: bool,
    /// General incentives (random instances).
    #[arg(long)]
    pub general: bool,
    /// Directory for `<name>.json`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MenuArgs {
    /// auto, single_arm, general, grid, hypercube or instance.
    #[arg(long, default_value = "auto")]
    pub menu: String,
    /// Grid resolution for grid/hypercube menus.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Size cap for profile or grid enumeration.
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment configuration (TOML). Flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in instance name or path to an instance document.
    #[arg(long)]
    pub instance: Option<String>,
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long = "T")]
    pub horizon: Option<u64>,
    /// A count `n` (seeds 0..n) or a comma-separated list.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub menu: MenuArgs,
    /// Leave per-round tuples out of the record files.
    #[arg(long)]
    pub no_rounds: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance documents to check instead of the golden set.
    #[arg(long)]
    pub instance: Vec<PathBuf>,
    #[arg(long = "T", default_value_t = VERIFY_HORIZON)]
    pub horizon: u64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Record files, or directories searched for `*.json` records.
    #[arg(required = true)]
    pub records: Vec<PathBuf>,
    #[arg(long, default_value = "plots")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub policy: String,
    /// `a..b` for the powers of two from a to b, or a comma-separated list.
    #[arg(long = "Ts")]
    pub horizons: String,
    #[arg(long, default_value = "20")]
    pub seeds: String,
    #[arg(long, default_value = "bench")]
    pub out: PathBuf,
    #[command(flatten)]
    pub menu: MenuArgs,
}

/// Parses `1024..65536` (doubling) or `100,200,400`.
pub fn parse_horizons(text: &str) -> Result<Vec<u64>> {
    let bad = |_| Error::InvalidArgument(format!("bad horizon list '{text}'"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(bad)?;
        let b: u64 = b.trim().parse().map_err(bad)?;
        if a == 0 || b < a {
            return invalid(format!("bad horizon range '{text}'"));
        }
        Ok(std::iter::successors(Some(a), |t| t.checked_mul(2))
            .take_while(|t| *t <= b)
            .collect())
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(bad)).collect()
    }
}

fn parse_menu(args: &MenuArgs) -> Result<MenuSpec> {
    let kind: MenuKind = serde_json::from_value(json!(args.menu))
        .map_err(|_| Error::InvalidArgument(format!("unknown menu kind '{}'", args.menu)))?;
    Ok(MenuSpec {
        kind,
        eps: args.eps,
        cap: args.cap,
    })
}

fn gen_source(a: &GenArgs) -> Result<InstanceSource> {
    let mut src = InstanceSource::parse(&a.kind);
    match &mut src {
        InstanceSource::File { .. } => return invalid(format!("unknown instance kind '{}'", a.kind)),
        InstanceSource::Example32 { delta } => *delta = a.delta.unwrap_or(*delta),
        InstanceSource::HardB1 { k, n, relaxed } => {
            *k = a.k.unwrap_or(*k);
            *n = a.n.unwrap_or(*n);
            *relaxed = !a.strict;
        }
        InstanceSource::HardB2 { k, n, eps } => {
            *k = a.k.unwrap_or(*k);
            *n = a.n.unwrap_or(*n);
            *eps = a.eps;
        }
        InstanceSource::SmoothHard {
            n,
            lipschitz,
            arm,
            position,
        } => {
            *n = a.n.unwrap_or(*n);
            *lipschitz = a.lipschitz.unwrap_or(*lipschitz);
            *arm = a.arm.unwrap_or(*arm);
            *position = a.position.unwrap_or(*position);
        }
        InstanceSource::Random {
            n,
            k,
            seed,
            grid,
            general,
        } => {
            *n = a.n.unwrap_or(*n);
            *k = a.k.unwrap_or(*k);
            *seed = a.seed.unwrap_or(*seed);
            *grid = a.grid;
            *general = a.general;
        }
        InstanceSource::Gaussian { n, k, seed } => {
            *n = a.n.unwrap_or(*n);
            *k = a.k.unwrap_or(*k);
            *seed = a.seed.unwrap_or(*seed);
        }
    }
    Ok(src)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let src = gen_source(a)?;
    let doc = src.document(a.horizon)?;
    let text = doc.to_json()?;
    match &a.out {
        Some(dir) => {
            let path = dir.join(format!("{}.json", src.label()));
            write(&path, &(text + "\n"))?;
            println!("{}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let (Some(instance), Some(policy), Some(horizon)) = (&a.instance, &a.policy, a.horizon) else {
                return invalid("run needs --config, or --instance, --policy and --T");
            };
            ExperimentConfig {
                instance: InstanceSource::parse(instance),
                policy: PolicySpec::parse_name(policy)?,
                menu: parse_menu(&a.menu)?,
                horizon,
                seeds: Seeds::Count(1),
                out: None,
                keep_rounds: true,
            }
        }
    };
    if a.config.is_some() {
        if let Some(i) = &a.instance {
            cfg.instance = InstanceSource::parse(i);
        }
        if let Some(p) = &a.policy {
            cfg.policy = PolicySpec::parse_name(p)?;
        }
        if let Some(t) = a.horizon {
            cfg.horizon = t;
        }
        if a.menu.eps.is_some() {
            cfg.menu.eps = a.menu.eps;
        }
        if a.menu.cap.is_some() {
            cfg.menu.cap = a.menu.cap;
        }
    }
    if let Some(s) = &a.seeds {
        cfg.seeds = Seeds::parse(s)?;
    }
    if a.no_rounds {
        cfg.keep_rounds = false;
    }
    cfg.validate()?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| "results".into());
    let scenario = Scenario::from_source(&cfg.instance, &cfg.menu, cfg.horizon)?;
    let records = run_seeds(&scenario, &cfg.policy, &cfg.seeds.resolve(), cfg.keep_rounds)?;
    let mut timings = String::from("run_id,wall_clock_seconds\n");
    for r in &records {
        write(
            &out.join("records").join(format!("{}.json", r.run_id)),
            &(r.to_json()? + "\n"),
        )?;
        timings.push_str(&format!("{},{:.6}\n", r.run_id, r.wall_clock.as_secs_f64()));
        println!(
            "{} regret {:.4} (benchmark {:.4}, slack {:.4}, basis {:?})",
            r.run_id,
            r.final_regret(),
            r.benchmark.value,
            r.benchmark.slack,
            r.benchmark.basis
        );
    }
    write(&out.join("timings.csv"), &timings)?;
    write(&out.join("regret.csv"), &rows_to_csv(&aggregate_records(&records)))?;
    write(
        &out.join("config.toml"),
        &toml::to_string(&cfg).map_err(|e| Error::Document(e.to_string()))?,
    )?;
    Ok(())
}

/// Returns the number of failed checks.
fn cmd_verify(a: &VerifyArgs) -> Result<usize> {
    let results = if a.instance.is_empty() {
        verify_golden(a.horizon)?
    } else {
        let mut all = Vec::new();
        for p in &a.instance {
            let doc = InstanceDocument::load(p)?;
            let name = p
                .file_stem()
                .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
            all.extend(verify_document(&name, &doc, a.horizon)?);
        }
        all
    };
    let mut failed = 0;
    for r in &results {
        if r.passed {
            println!("ok   {:<10} {:<16} {}", r.suite, r.instance, r.detail);
        } else {
            failed += 1;
            println!("FAIL {:<10} {:<16} {}", r.suite, r.instance, r.detail);
            eprintln!(
                "{}",
                json!({"error": "invariant", "suite": r.suite, "instance": r.instance, "detail": r.detail})
            );
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(failed)
}

fn collect_records(paths: &[PathBuf]) -> Result<Vec<RunRecord>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut stack = vec![p.clone()];
            while let Some(d) = stack.pop() {
                for e in fs::read_dir(&d)? {
                    let path = e?.path();
                    if path.is_dir() {
                        stack.push(path);
                    } else if path.extension().is_some_and(|x| x == "json") {
                        files.push(path);
                    }
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f)?;
        match serde_json::from_str::<RunRecord>(&text) {
            Ok(r) => out.push(r),
            Err(e) => log::warn!("skipping {}: {e}", f.display()),
        }
    }
    if out.is_empty() {
        return invalid("no record files found");
    }
    Ok(out)
}

fn cmd_plot(a: &PlotArgs) -> Result<()> {
    let records = collect_records(&a.records)?;
    let rows = aggregate_records(&records);
    write(&a.out.join("regret.csv"), &rows_to_csv(&rows))?;
    let svg = loglog_svg("cumulative regret", &series_from_rows(&rows))?;
    write(&a.out.join("regret.svg"), &svg)?;
    println!("{}", a.out.join("regret.svg").display());
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let src = InstanceSource::parse(&a.instance);
    let policy = PolicySpec::parse_name(&a.policy)?;
    let horizons = parse_horizons(&a.horizons)?;
    let seeds = Seeds::parse(&a.seeds)?.resolve();
    let summary = bench(&src, &parse_menu(&a.menu)?, &policy, &horizons, &seeds)?;
    write(&a.out.join("bench.csv"), &summary.to_csv())?;
    write(
        &a.out.join("bench_summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let svg = loglog_svg(
        &format!("{} on {}", summary.policy, summary.instance),
        &[crate::harness::plot::Series {
            label: summary.policy.clone(),
            points: summary.rows.iter().map(|r| (r.t as f64, r.regret_mean)).collect(),
        }],
    )?;
    write(&a.out.join("bench.svg"), &svg)?;
    print!("{}", summary.to_csv());
    match summary.slope {
        Some(s) => println!("slope {s:.4}"),
        None => println!("slope undefined (needs two horizons with positive mean regret)"),
    }
    Ok(())
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::CapExceeded { .. } => "cap_exceeded",
        Error::Infeasible(_) => "infeasible",
        Error::Numerical(_) => "numerical",
        Error::Invariant(_) => "invariant",
        Error::Document(_) => "document",
        Error::Io(_) => "io",
    }
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 when an
/// invariant check fails, 2 on any other error. Failures print one JSON
/// line on stderr.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| 0),
        Command::Run(a) => cmd_run(a).map(|_| 0),
        Command::Verify(a) => cmd_verify(a).map(|f| i32::from(f > 0)),
        Command::Plot(a) => cmd_plot(a).map(|_| 0),
        Command::Bench(a) => cmd_bench(a).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({"error": error_kind(&e), "message": e.to_string()}));
            if matches!(e, Error::Invariant(_)) {
                1
            } else {
                2
            }
        }
    }
}
