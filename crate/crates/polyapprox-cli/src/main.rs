//! Command-line entry point: experiment orchestration, density tabulation,
//! best-polygon construction, rigidity reports, fixture maintenance.
//!
//! Exit codes: 0 success, 2 configuration error (bad flags, bad body/density
//! grammar, out-of-range indices), 3 numerical failure (envelope violation,
//! non-convergence, excessive circumscribed miss rates, fixture drift).

use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use polyapprox::bodies::ConvexBody;
use polyapprox::experiments::{
    best_polygon_dp, fit_rate, fits_csv, results_csv, rigidity_report, run_circumscribed,
    run_inscribed, DpObjective, ExperimentConfig, RateFit,
};
use polyapprox::fixtures;
use polyapprox::polytope::Side;
use polyapprox::sampling::DensitySpec;
use polyapprox::{Error, Result};

#[derive(Parser)]
#[command(name = "polyapprox", version, about = "Polytopal approximation experiments for smooth convex bodies (d = 2, 3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo experiment with random inscribed polytopes.
    Inscribe(ExperimentArgs),
    /// Monte Carlo experiment with random circumscribed polytopes.
    Circumscribe(ExperimentArgs),
    /// Density-gap rigidity diagnostic for two intrinsic-volume indices.
    Rigidity(RigidityArgs),
    /// Tabulate a boundary density on a parameter grid (CSV to stdout).
    Density(DensityArgs),
    /// Near-best inscribed polygon by dynamic programming.
    Bestpoly(BestpolyArgs),
    /// Check or regenerate the derived-value fixture file.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Body spec: ball:r=1[,d=3] | ellipse:a=2,b=1 | ellipsoid:a=1,b=1,c=2 |
    /// support2d:c0=1,c2=0.1
    #[arg(long)]
    body: Option<String>,
    /// Density spec: uniform | opt:volume | opt:meanwidth |
    /// opt:intrinsic:j=1 | custom:alpha=..,m=..,beta=..
    #[arg(long)]
    density: Option<String>,
    /// Comma-separated intrinsic-volume indices (default: d for inscribe,
    /// "1,d" for circumscribe).
    #[arg(long)]
    j: Option<String>,
    /// Budget schedule lo:hi, expanded geometrically by factor 2.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional TOML config with the same keys (body, density, j, n, trials,
    /// seed); explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: logical cores). Results are identical for
    /// any worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Suppress the timestamp header line for byte-reproducible CSVs.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct RigidityArgs {
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    j1: usize,
    #[arg(long)]
    j2: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    body: Option<String>,
    /// Density spec to tabulate.
    #[arg(long)]
    kind: String,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args)]
struct BestpolyArgs {
    #[arg(long)]
    body: Option<String>,
    /// Vertex budget.
    #[arg(long)]
    n: usize,
    /// area | perimeter
    #[arg(long)]
    objective: String,
    /// Boundary grid size (must be >= 8 N).
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// Evenly spaced anchor starts (>= 8).
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FixturesArgs {
    /// Rewrite the fixture file with freshly computed values.
    #[arg(long)]
    regen: bool,
    /// Fixture file (default: POLYAPPROX_FIXTURES or fixtures/derived.txt).
    #[arg(long)]
    path: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// JSON summaries (schema: schemas/summary.schema.json)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CellSummary {
    n: usize,
    j: usize,
    mean: f64,
    stderr: f64,
    used: usize,
    misses: usize,
}

#[derive(Serialize)]
struct FitSummary {
    j: usize,
    exponent: f64,
    log_const: f64,
    r2: f64,
    points_used: usize,
}

#[derive(Serialize)]
struct ExperimentSummary {
    #[serde(rename = "type")]
    kind: String,
    command: String,
    body: String,
    density: String,
    side: String,
    js: Vec<usize>,
    schedule: Vec<usize>,
    trials: usize,
    seed: u64,
    config_hash: String,
    cells: Vec<CellSummary>,
    fits: Vec<FitSummary>,
    vertex_fraction: Vec<(usize, f64)>,
}

#[derive(Serialize)]
struct RigiditySummary {
    #[serde(rename = "type")]
    kind: String,
    body: String,
    j1: usize,
    j2: usize,
    gap: f64,
    factor_j1_under_j2opt: f64,
    factor_j2_under_j1opt: f64,
    curvature_ratio: f64,
    ball_consistent: bool,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(match e {
                Error::InvalidInput(_) | Error::Capability(_) | Error::Resolution(_) => 2,
                _ => 3,
            });
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Inscribe(args) => experiment(args, Side::Inscribed),
        Command::Circumscribe(args) => experiment(args, Side::Circumscribed),
        Command::Rigidity(args) => rigidity(args),
        Command::Density(args) => density(args),
        Command::Bestpoly(args) => bestpoly(args),
        Command::Fixtures(args) => fixtures_cmd(args),
    }
}

/// TOML config file with the same keys as the flags.
#[derive(Default, serde::Deserialize)]
struct FileConfig {
    body: Option<String>,
    density: Option<String>,
    j: Option<String>,
    n: Option<String>,
    trials: Option<usize>,
    seed: Option<u64>,
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("missing required flag --{flag} (or config key `{flag}`)")))
}

fn parse_js(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad index `{p}` in --j")))
        })
        .collect()
}

fn parse_schedule(s: &str) -> Result<Vec<usize>> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("schedule `{s}` is not lo:hi")))?;
    let lo: usize = lo
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad schedule bound `{lo}`")))?;
    let hi: usize = hi
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad schedule bound `{hi}`")))?;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidInput(format!("empty schedule `{s}`")));
    }
    Ok(ExperimentConfig::geometric_schedule(lo, hi))
}

fn timestamp_line(suppress: bool) -> Option<String> {
    if suppress {
        return None;
    }
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Some(format!("unix:{secs}"))
}

fn init_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // Ignore the error if a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
}

fn experiment(args: ExperimentArgs, side: Side) -> Result<()> {
    init_workers(args.workers);
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad config file: {e}")))?
        }
        None => FileConfig::default(),
    };
    let body_spec = require(args.body.or(file.body), "body")?;
    let body = ConvexBody::<f64>::parse(&body_spec)?;
    let d = body.dim();
    let density_spec = args
        .density
        .or(file.density)
        .unwrap_or_else(|| "uniform".into());
    let js = match args.j.or(file.j) {
        Some(s) => parse_js(&s)?,
        None => match side {
            Side::Inscribed => vec![d],
            Side::Circumscribed => vec![1, d],
        },
    };
    let schedule = parse_schedule(&require(args.n.or(file.n), "n")?)?;
    let trials = require(args.trials.or(file.trials), "trials")?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let config = ExperimentConfig {
        body_spec,
        density_spec,
        side,
        js,
        schedule,
        trials,
        seed,
    };
    let (command, result) = match side {
        Side::Inscribed => ("inscribe", run_inscribed(&config)?),
        Side::Circumscribed => ("circumscribe", run_circumscribed(&config)?),
    };
    let fits: Vec<RateFit> = config
        .js
        .iter()
        .filter_map(|&j| fit_rate(&result, j).ok())
        .collect();

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create output directory: {e}")))?;
    let ts = timestamp_line(args.no_timestamp);
    let write = |name: &str, content: &str| -> Result<()> {
        fs::write(args.out_dir.join(name), content)
            .map_err(|e| Error::InvalidInput(format!("cannot write {name}: {e}")))
    };
    write("results.csv", &results_csv(&result, ts.as_deref()))?;
    write("rate_fits.csv", &fits_csv(&result, &fits, ts.as_deref()))?;
    let summary = ExperimentSummary {
        kind: "experiment".into(),
        command: command.into(),
        body: result.body.clone(),
        density: result.density.clone(),
        side: result.side.to_string(),
        js: config.js.clone(),
        schedule: config.schedule.clone(),
        trials: config.trials,
        seed: config.seed,
        config_hash: result.config_hash.clone(),
        cells: result
            .cells
            .iter()
            .map(|c| CellSummary {
                n: c.n,
                j: c.j,
                mean: c.mean,
                stderr: c.stderr,
                used: c.used,
                misses: c.misses,
            })
            .collect(),
        fits: fits
            .iter()
            .map(|f| FitSummary {
                j: f.j,
                exponent: f.exponent,
                log_const: f.log_const,
                r2: f.r_squared,
                points_used: f.points_used,
            })
            .collect(),
        vertex_fraction: result.vertex_fraction.clone(),
    };
    write(
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("serializable summary"),
    )?;

    println!(
        "{command}: {} under {} ({} schedule points x {} trials, seed {})",
        result.body,
        result.density,
        config.schedule.len(),
        config.trials,
        config.seed
    );
    for f in &fits {
        println!(
            "  j={}: exponent {:.4}, constant {:.6}, R^2 {:.5}",
            f.j,
            f.exponent,
            f.log_const.exp(),
            f.r_squared
        );
    }
    println!("  wrote results.csv, rate_fits.csv, summary.json to {}", args.out_dir.display());
    Ok(())
}

fn rigidity(args: RigidityArgs) -> Result<()> {
    let body_spec = require(args.body, "body")?;
    let body = ConvexBody::<f64>::parse(&body_spec)?;
    let report = rigidity_report(&body, args.j1, args.j2)?;
    let summary = RigiditySummary {
        kind: "rigidity".into(),
        body: report.body.clone(),
        j1: report.j1,
        j2: report.j2,
        gap: report.gap,
        factor_j1_under_j2opt: report.factor_j1_under_j2opt,
        factor_j2_under_j1opt: report.factor_j2_under_j1opt,
        curvature_ratio: report.curvature_ratio,
        ball_consistent: report.ball_consistent,
    };
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create output directory: {e}")))?;
    let path = args.out_dir.join("rigidity.json");
    fs::write(
        &path,
        serde_json::to_string_pretty(&summary).expect("serializable summary"),
    )
    .map_err(|e| Error::InvalidInput(format!("cannot write rigidity.json: {e}")))?;
    println!(
        "rigidity {}: gap {:.6e}, factors ({:.6}, {:.6}), curvature ratio {:.4} -> {}",
        report.body,
        report.gap,
        report.factor_j1_under_j2opt,
        report.factor_j2_under_j1opt,
        report.curvature_ratio,
        if report.ball_consistent { "ball-consistent" } else { "not ball-consistent" }
    );
    println!("  wrote {}", path.display());
    Ok(())
}

fn density(args: DensityArgs) -> Result<()> {
    use std::io::Write;
    let body_spec = require(args.body, "body")?;
    let body = ConvexBody::<f64>::parse(&body_spec)?;
    let spec = DensitySpec::parse(&body, &args.kind)?;
    // Stop quietly when the reader goes away (e.g. piped into `head`).
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if writeln!(out, "param0,param1,kappa,density").is_err() {
        return Ok(());
    }
    for p in body.param_grid(args.grid) {
        let bp = body.boundary(p);
        if writeln!(out, "{},{},{},{}", p[0], p[1], bp.kappa, spec.eval(&bp)).is_err() {
            return Ok(());
        }
    }
    Ok(())
}

fn bestpoly(args: BestpolyArgs) -> Result<()> {
    let body_spec = require(args.body, "body")?;
    let body = ConvexBody::<f64>::parse(&body_spec)?;
    let objective = match args.objective.as_str() {
        "area" => DpObjective::Area,
        "perimeter" => DpObjective::Perimeter,
        other => {
            return Err(Error::InvalidInput(format!(
                "objective `{other}` is not area|perimeter"
            )))
        }
    };
    let res = best_polygon_dp(&body, args.n, args.grid, objective, args.starts)?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create output directory: {e}")))?;
    let off_path = args.out_dir.join("bestpoly.off");
    fs::write(&off_path, res.polygon.to_off())
        .map_err(|e| Error::InvalidInput(format!("cannot write OFF: {e}")))?;
    let mut hist = String::from("bin,mass\n");
    for (i, m) in res.histogram.iter().enumerate() {
        hist.push_str(&format!("{i},{m}\n"));
    }
    let hist_path = args.out_dir.join("bestpoly_histogram.csv");
    fs::write(&hist_path, hist)
        .map_err(|e| Error::InvalidInput(format!("cannot write histogram: {e}")))?;
    println!(
        "bestpoly {}: N={} objective={} grid={} deviation {:.8e}",
        body.label(),
        args.n,
        res.objective,
        res.grid,
        res.deviation
    );
    println!("  wrote {} and {}", off_path.display(), hist_path.display());
    Ok(())
}

fn fixtures_cmd(args: FixturesArgs) -> Result<()> {
    let path = args.path.unwrap_or_else(fixtures::default_path);
    let fresh = fixtures::compute(true)?;
    let pinned = match fs::read_to_string(&path) {
        Ok(text) => fixtures::parse(&text)?,
        Err(_) => Vec::new(),
    };
    let deltas = fixtures::compare(&pinned, &fresh);
    for d in &deltas {
        match d.pinned {
            Some(p) => println!(
                "{}: pinned {:.12e} fresh {:.12e} delta {:.3e} {}",
                d.name,
                p,
                d.fresh,
                d.rel_delta,
                if d.within_tolerance { "ok" } else { "DRIFT" }
            ),
            None => println!("{}: new value {:.12e}", d.name, d.fresh),
        }
    }
    if args.regen {
        fs::write(&path, fixtures::render(&fresh))
            .map_err(|e| Error::InvalidInput(format!("cannot write fixtures: {e}")))?;
        println!("rewrote {}", path.display());
        return Ok(());
    }
    if deltas.iter().any(|d| !d.within_tolerance) {
        return Err(Error::Numerical("fixture drift detected".into()));
    }
    println!("all {} fixtures within tolerance", deltas.len());
    Ok(())
}
