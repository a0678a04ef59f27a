//! Command-line front end: build and serialize domains, evaluate the
//! distance-ratio and quasihyperbolic metrics (single pairs or CSV
//! batches), run sampled profiles and scripted experiments, and draw
//! SVG plots.
//!
//! Exit codes: 0 on success, 2 on a usage error, 1 on a computation
//! error (with a machine-readable JSON object on stderr).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qhgeo::analysis::{
    comb_divergence, john_constant, phi_profile, uniformity_constant, AnalysisError, Sampler,
};
use qhgeo::domains::{self, CombParams, DomainsError, CATALOG_NAMES};
use qhgeo::geometry::{Domain, DomainSpec, GeoError, Point, Region, Truncation};
use qhgeo::metrics::{j_metric, MetricEngine, MetricError};
use qhgeo::render;

#[derive(Parser)]
#[command(
    name = "qhgeo",
    version,
    about = "Planar quasihyperbolic geometry toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    run: RunConfig,
}

/// Options shared by every subcommand.
#[derive(Args, Debug)]
struct RunConfig {
    /// RNG seed for sampled computations
    #[arg(long, global = true, env = "QHGEO_SEED", default_value_t = 42)]
    seed: u64,
    /// Relative tolerance for geodesic refinement, in (0, 0.5]
    #[arg(long, global = true, default_value_t = 0.02)]
    rel_tol: f64,
    /// Maximum grid refinement level, in [1, 10]
    #[arg(long, global = true, default_value_t = 7)]
    max_level: u32,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads (default: all logical cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build, inspect, or list domains
    #[command(subcommand)]
    Domain(DomainCmd),
    /// Evaluate a metric for one pair (--x/--y) or a CSV batch (--pairs)
    Metric(MetricArgs),
    /// Sampled statistical profiles of a domain
    Profile(ProfileArgs),
    /// Scripted experiments
    Experiment(ExperimentArgs),
    /// Draw a domain outline as a standalone SVG
    Plot(PlotArgs),
}

#[derive(Subcommand)]
enum DomainCmd {
    /// Serialize a catalog domain to its JSON description
    Build(DomainBuildArgs),
    /// Summarize a domain: region kind, boundary size, truncation, bbox
    Show(DomainShowArgs),
    /// List catalog domain names
    List,
}

#[derive(Args)]
struct DomainBuildArgs {
    /// Catalog name (see `qhgeo domain list`)
    #[arg(long)]
    catalog: String,
    /// Comb tooth-width base
    #[arg(long, default_value_t = 0.2)]
    u: f64,
    /// Comb gap base
    #[arg(long, default_value_t = 0.4)]
    t: f64,
    /// Comb tooth-height base
    #[arg(long, default_value_t = 0.7)]
    v: f64,
    /// Comb tooth count
    #[arg(long, default_value_t = 8)]
    kmax: usize,
    /// Frame margin for the comb-complement truncation box
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
    /// Inner clip radius for the punctured plane
    #[arg(long, default_value_t = 0.05)]
    r_in: f64,
    /// Outer clip radius for the punctured plane
    #[arg(long, default_value_t = 20.0)]
    r_out: f64,
}

#[derive(Args)]
struct DomainShowArgs {
    /// Catalog name or JSON domain file (a file path wins)
    #[arg(long)]
    domain: String,
}

#[derive(Args)]
struct MetricArgs {
    /// j: one-step distance ratio; k: geodesic quasihyperbolic distance
    #[arg(value_enum)]
    which: MetricKind,
    /// Catalog name or JSON domain file (a file path wins)
    #[arg(long)]
    domain: String,
    /// First point
    #[arg(long, value_name = "A,B")]
    x: Option<String>,
    /// Second point
    #[arg(long, value_name = "A,B")]
    y: Option<String>,
    /// CSV with columns x1,y1,x2,y2; metric columns are appended
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// phi: distortion envelope; uniformity: sup k/j; john: cone constant
    #[arg(value_enum)]
    which: ProfileKind,
    /// Catalog name or JSON domain file (a file path wins)
    #[arg(long)]
    domain: String,
    /// Number of sampled pairs
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Pair sampler for the phi envelope
    #[arg(long, value_enum, default_value_t = SamplerArg::BoundaryBiased)]
    sampler: SamplerArg,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    which: ExperimentKind,
    /// Comb tooth-width base
    #[arg(long, default_value_t = 0.2)]
    u: f64,
    /// Comb gap base
    #[arg(long, default_value_t = 0.4)]
    t: f64,
    /// Comb tooth-height base
    #[arg(long, default_value_t = 0.7)]
    v: f64,
    /// Number of table rows (witness indices 1..=kmax)
    #[arg(long, default_value_t = 6)]
    kmax: usize,
    /// Also draw the domain, geodesics, and witnesses to this SVG file
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Catalog name or JSON domain file (a file path wins)
    #[arg(long)]
    domain: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricKind {
    J,
    K,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileKind {
    Phi,
    Uniformity,
    John,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentKind {
    CombDivergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplerArg {
    Uniform,
    BoundaryBiased,
}

impl From<SamplerArg> for Sampler {
    fn from(s: SamplerArg) -> Sampler {
        match s {
            SamplerArg::Uniform => Sampler::Uniform,
            SamplerArg::BoundaryBiased => Sampler::BoundaryBiased,
        }
    }
}

/// A malformed invocation (exit 2) or a failed computation (exit 1).
#[derive(Debug)]
enum AppError {
    Usage(String),
    Compute(anyhow::Error),
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

impl From<MetricError> for AppError {
    fn from(e: MetricError) -> Self {
        AppError::Compute(e.into())
    }
}

impl From<AnalysisError> for AppError {
    fn from(e: AnalysisError) -> Self {
        AppError::Compute(e.into())
    }
}

impl From<DomainsError> for AppError {
    fn from(e: DomainsError) -> Self {
        AppError::Compute(e.into())
    }
}

impl From<GeoError> for AppError {
    fn from(e: GeoError) -> Self {
        AppError::Compute(e.into())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Compute(e.into())
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Compute(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Compute(err)) => {
            let detail = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{detail}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = &cli.run;
    if !(cfg.rel_tol > 0.0 && cfg.rel_tol <= 0.5) {
        return Err(usage(format!("--rel-tol must lie in (0, 0.5], got {}", cfg.rel_tol)));
    }
    if !(1..=10).contains(&cfg.max_level) {
        return Err(usage(format!("--max-level must lie in [1, 10], got {}", cfg.max_level)));
    }
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| AppError::Compute(anyhow!("thread pool setup failed: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Domain(cmd) => run_domain(cmd, cfg),
        Cmd::Metric(args) => run_metric(args, cfg),
        Cmd::Profile(args) => run_profile(args, cfg),
        Cmd::Experiment(args) => run_experiment(args, cfg),
        Cmd::Plot(args) => run_plot(args, cfg),
    }
}

/// Write to `--out` if given, otherwise stdout. `content` must end with
/// a newline.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Six significant digits in fixed point, scientific notation for
/// extreme magnitudes. Deterministic, so re-runs emit identical bytes.
fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..=8).contains(&mag) {
        return format!("{x:.5e}");
    }
    let prec = (5 - mag).max(0) as usize;
    format!("{x:.prec$}")
}

fn parse_point(flag: &str, text: &str) -> Result<Point, AppError> {
    let bad = || usage(format!("--{flag} expects two finite numbers 'a,b', got '{text}'"));
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let x: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let y: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !x.is_finite() || !y.is_finite() {
        return Err(bad());
    }
    Ok(Point::new(x, y))
}

/// `--domain` accepts a JSON domain file or a catalog name; an existing
/// file path takes precedence.
fn resolve_domain(input: &str) -> Result<Domain, AppError> {
    let path = Path::new(input);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        let spec: DomainSpec = serde_json::from_str(&text)
            .map_err(|e| AppError::Compute(anyhow!("parsing domain file '{input}': {e}")))?;
        return Ok(Domain::from_spec(spec)?);
    }
    domains::domain_by_name(input).ok_or_else(|| {
        usage(format!(
            "unknown domain '{input}'; expected a JSON file or one of: {}",
            CATALOG_NAMES.join(", ")
        ))
    })
}

fn engine_for(domain: Arc<Domain>, cfg: &RunConfig) -> MetricEngine {
    MetricEngine::new(domain).with_rel_tol(cfg.rel_tol).with_max_level(cfg.max_level)
}

fn build_catalog(a: &DomainBuildArgs) -> Result<Domain, AppError> {
    let comb_params =
        || CombParams::new(a.u, a.t, a.v, a.kmax).map_err(|e| usage(e.to_string()));
    match a.catalog.as_str() {
        "disc" => Ok(domains::build_disc()),
        "half-plane" => Ok(domains::build_half_plane()),
        "punctured-plane" => {
            domains::build_punctured_plane(a.r_in, a.r_out).map_err(|e| usage(e.to_string()))
        }
        "slit-disc" => Ok(domains::build_slit_disc()),
        "comb" => Ok(domains::build_comb(comb_params()?).0),
        "comb-complement" => domains::build_comb_complement(comb_params()?, a.margin)
            .map_err(|e| usage(e.to_string())),
        other => Err(usage(format!(
            "unknown catalog domain '{other}'; expected one of: {}",
            CATALOG_NAMES.join(", ")
        ))),
    }
}

fn truncation_text(t: Truncation) -> String {
    match t {
        Truncation::None => "none".to_string(),
        Truncation::Box { rect } => format!(
            "box [{}, {}] x [{}, {}]",
            sig6(rect.x0),
            sig6(rect.x1),
            sig6(rect.y0),
            sig6(rect.y1)
        ),
        Truncation::Annulus { center, r_in, r_out } => format!(
            "annulus at ({}, {}) with radii {}..{}",
            sig6(center.x),
            sig6(center.y),
            sig6(r_in),
            sig6(r_out)
        ),
    }
}

fn run_domain(cmd: &DomainCmd, cfg: &RunConfig) -> Result<(), AppError> {
    match cmd {
        DomainCmd::Build(a) => {
            let d = build_catalog(a)?;
            let json = serde_json::to_string_pretty(&d.to_spec())?;
            emit(&cfg.out, &(json + "\n"))
        }
        DomainCmd::Show(a) => {
            let d = resolve_domain(&a.domain)?;
            if cfg.format == Format::Json {
                let json = serde_json::to_string_pretty(&d.to_spec())?;
                return emit(&cfg.out, &(json + "\n"));
            }
            let b = d.bbox();
            let region = match d.region() {
                Region::Union => "union of primitives",
                Region::Complement => "complement of primitives",
            };
            let mut s = String::new();
            let _ = writeln!(s, "name: {}", d.name());
            let _ = writeln!(s, "region: {region}");
            let _ = writeln!(s, "boundary elements: {}", d.boundary().len());
            let _ = writeln!(s, "truncation: {}", truncation_text(d.truncation()));
            let _ = writeln!(
                s,
                "bbox: [{}, {}] x [{}, {}]",
                sig6(b.x0),
                sig6(b.x1),
                sig6(b.y0),
                sig6(b.y1)
            );
            emit(&cfg.out, &s)
        }
        DomainCmd::List => {
            let mut s = String::new();
            for name in CATALOG_NAMES {
                let _ = writeln!(s, "{name}");
            }
            emit(&cfg.out, &s)
        }
    }
}

fn run_metric(a: &MetricArgs, cfg: &RunConfig) -> Result<(), AppError> {
    let domain = Arc::new(resolve_domain(&a.domain)?);
    if let Some(pairs) = &a.pairs {
        return metric_batch(a, cfg, domain, pairs);
    }
    let (Some(xs), Some(ys)) = (a.x.as_deref(), a.y.as_deref()) else {
        return Err(usage("metric needs --x A,B and --y C,D, or --pairs FILE"));
    };
    let x = parse_point("x", xs)?;
    let y = parse_point("y", ys)?;
    match a.which {
        MetricKind::J => {
            let j = j_metric(&domain, x, y)?;
            match cfg.format {
                Format::Json => {
                    emit(&cfg.out, &format!("{}\n", serde_json::json!({ "j": j })))
                }
                _ => emit(&cfg.out, &format!("{}\n", sig6(j))),
            }
        }
        MetricKind::K => {
            let sample = engine_for(domain, cfg).k(x, y)?;
            match cfg.format {
                Format::Json => {
                    emit(&cfg.out, &format!("{}\n", serde_json::to_string_pretty(&sample)?))
                }
                Format::Csv => emit(
                    &cfg.out,
                    &format!(
                        "j,k_est,k_err,ratio,converged\n{},{},{},{},{}\n",
                        sig6(sample.j),
                        sig6(sample.k_est),
                        sig6(sample.k_err),
                        sig6(sample.ratio),
                        sample.converged
                    ),
                ),
                Format::Text => emit(&cfg.out, &format!("{}\n", sig6(sample.k_est))),
            }
        }
    }
}

fn metric_batch(
    a: &MetricArgs,
    cfg: &RunConfig,
    domain: Arc<Domain>,
    pairs: &Path,
) -> Result<(), AppError> {
    let text = fs::read_to_string(pairs)?;
    let mut lines = text.lines();
    let header = lines.next().map(str::trim_end).unwrap_or("");
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| usage(format!("pairs CSV lacks required column '{name}'")))
    };
    let (ix1, iy1, ix2, iy2) = (col("x1")?, col("y1")?, col("x2")?, col("y2")?);

    let mut rows: Vec<(Point, Point, &str)> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = |i: usize| -> Result<f64, AppError> {
            fields
                .get(i)
                .and_then(|f| f.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| usage(format!("pairs CSV row {}: bad value in '{line}'", n + 2)))
        };
        let x = Point::new(field(ix1)?, field(iy1)?);
        let y = Point::new(field(ix2)?, field(iy2)?);
        rows.push((x, y, line));
    }

    let engine = match a.which {
        MetricKind::K => Some(engine_for(domain.clone(), cfg)),
        MetricKind::J => None,
    };
    // Parallel evaluation; indexed collect keeps the output order equal
    // to the input order no matter the thread count.
    let computed: Vec<Result<String, AppError>> = rows
        .par_iter()
        .map(|(x, y, _)| match &engine {
            Some(engine) => {
                let s = engine.k(*x, *y)?;
                Ok(format!(
                    "{},{},{},{}",
                    sig6(s.j),
                    sig6(s.k_est),
                    sig6(s.k_err),
                    sig6(s.ratio)
                ))
            }
            None => Ok(sig6(j_metric(&domain, *x, *y)?)),
        })
        .collect();

    let appended = match a.which {
        MetricKind::K => "j,k_est,k_err,ratio",
        MetricKind::J => "j",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{header},{appended}");
    for ((_, _, line), cell) in rows.iter().zip(computed) {
        let _ = writeln!(out, "{line},{}", cell?);
    }
    emit(&cfg.out, &out)
}

fn point_fields(p: Option<Point>) -> (String, String) {
    match p {
        Some(p) => (sig6(p.x), sig6(p.y)),
        None => (String::new(), String::new()),
    }
}

fn run_profile(a: &ProfileArgs, cfg: &RunConfig) -> Result<(), AppError> {
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let domain = Arc::new(resolve_domain(&a.domain)?);
    let engine = engine_for(domain, cfg);
    match a.which {
        ProfileKind::Phi => {
            let profile = phi_profile(&engine, a.samples, a.sampler.into(), cfg.seed)?;
            if cfg.format == Format::Json {
                return emit(&cfg.out, &format!("{}\n", serde_json::to_string_pretty(&profile)?));
            }
            let mut s = String::from("ratio_edge,sup_k\n");
            for bin in &profile.bins {
                let _ = writeln!(s, "{},{}", sig6(bin.ratio_edge), sig6(bin.sup_k));
            }
            emit(&cfg.out, &s)
        }
        ProfileKind::Uniformity => {
            let report = uniformity_constant(&engine, a.samples, cfg.seed)?;
            match cfg.format {
                Format::Json => {
                    emit(&cfg.out, &format!("{}\n", serde_json::to_string_pretty(&report)?))
                }
                Format::Csv => {
                    let (x1, y1) = point_fields(report.witness.map(|w| w.0));
                    let (x2, y2) = point_fields(report.witness.map(|w| w.1));
                    emit(
                        &cfg.out,
                        &format!(
                            "sup_ratio_kj,samples,unbounded_trend,witness_x1,witness_y1,witness_x2,witness_y2\n{},{},{},{x1},{y1},{x2},{y2}\n",
                            sig6(report.sup_ratio_kj),
                            report.samples,
                            report.unbounded_trend
                        ),
                    )
                }
                Format::Text => {
                    let mut s = String::new();
                    let _ = writeln!(s, "sup k/j: {}", sig6(report.sup_ratio_kj));
                    let _ = writeln!(s, "samples: {}", report.samples);
                    let _ = writeln!(
                        s,
                        "unbounded trend: {}",
                        if report.unbounded_trend { "yes" } else { "no" }
                    );
                    if let Some((x, y)) = report.witness {
                        let _ = writeln!(
                            s,
                            "witness: ({}, {}) -> ({}, {})",
                            sig6(x.x),
                            sig6(x.y),
                            sig6(y.x),
                            sig6(y.y)
                        );
                    }
                    emit(&cfg.out, &s)
                }
            }
        }
        ProfileKind::John => {
            let report = john_constant(&engine, a.samples, cfg.seed)?;
            match cfg.format {
                Format::Json => {
                    emit(&cfg.out, &format!("{}\n", serde_json::to_string_pretty(&report)?))
                }
                Format::Csv => {
                    let (x1, y1) = point_fields(report.witness_pair.map(|w| w.0));
                    let (x2, y2) = point_fields(report.witness_pair.map(|w| w.1));
                    let (zx, zy) = point_fields(report.witness_z);
                    emit(
                        &cfg.out,
                        &format!(
                            "c_est,samples,witness_x1,witness_y1,witness_x2,witness_y2,witness_zx,witness_zy\n{},{},{x1},{y1},{x2},{y2},{zx},{zy}\n",
                            sig6(report.c_est),
                            report.samples
                        ),
                    )
                }
                Format::Text => {
                    let mut s = String::new();
                    let _ = writeln!(s, "cone constant: {}", sig6(report.c_est));
                    let _ = writeln!(s, "samples: {}", report.samples);
                    if let (Some((x, y)), Some(z)) = (report.witness_pair, report.witness_z) {
                        let _ = writeln!(
                            s,
                            "witness: ({}, {}) -> ({}, {}) via ({}, {})",
                            sig6(x.x),
                            sig6(x.y),
                            sig6(y.x),
                            sig6(y.y),
                            sig6(z.x),
                            sig6(z.y)
                        );
                    }
                    emit(&cfg.out, &s)
                }
            }
        }
    }
}

fn run_experiment(a: &ExperimentArgs, cfg: &RunConfig) -> Result<(), AppError> {
    let ExperimentKind::CombDivergence = a.which;
    if a.kmax < 1 {
        return Err(usage("--kmax must be at least 1"));
    }
    let params = CombParams::new(a.u, a.t, a.v, a.kmax).map_err(|e| usage(e.to_string()))?;
    let report = comb_divergence(params, 1..=a.kmax, cfg.rel_tol)?;
    if let Some(path) = &a.plot {
        let svg = render::geodesic_plot_svg(&report.domain, &report.geodesics, &report.witnesses);
        fs::write(path, svg)?;
    }
    if cfg.format == Format::Json {
        return emit(&cfg.out, &format!("{}\n", serde_json::to_string_pretty(&report.rows)?));
    }
    let mut s = String::from("k_index,j_val,j_bound,k_est,k_lower_bound,ratio_kj\n");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.k_index,
            sig6(row.j_val),
            sig6(row.j_bound),
            sig6(row.k_est),
            sig6(row.k_lower_bound),
            sig6(row.ratio_kj)
        );
    }
    emit(&cfg.out, &s)
}

fn run_plot(a: &PlotArgs, cfg: &RunConfig) -> Result<(), AppError> {
    let d = resolve_domain(&a.domain)?;
    emit(&cfg.out, &render::domain_svg(&d))
}
