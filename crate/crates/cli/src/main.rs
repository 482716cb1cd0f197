//! `qsurf` — command-line front end for the quadrature-surface laboratory.
//!
//! Subcommands: `solve` (Dirichlet solve + flux diagnostics), `minimize`
//! (free-boundary gradient flow + verification), `sweep` (existence
//! threshold over a/k), `check` (geometric checks on a boundary file).
//!
//! Exit codes: 0 success (including scientifically negative outcomes such
//! as collapse onto C), 2 input error, 3 solver failure, 4 projection
//! failure.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::RunConfig;
use qsurf::analysis::{self, SweepOptions};
use qsurf::geometry::{self, fmt17, GraphDomain, Vec2};
use qsurf::potential::{self, LineSource};
use qsurf::shape_opt::{self, MinimizeResult, MinimizeStatus};
use qsurf::Error;

#[derive(Parser)]
#[command(
    name = "qsurf",
    version,
    about = "Free-boundary solver and verification lab for quadrature surfaces \
             with a segment source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides applied after the config file, e.g. `a=4.0 n=129`.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Dirichlet problem on a fixed domain and report the flux.
    Solve(CommonArgs),
    /// Run the free-boundary gradient flow and verify the result.
    Minimize(CommonArgs),
    /// Sweep the intensity ratio a/k and bracket the existence threshold.
    Sweep(CommonArgs),
    /// Geometric checks (GNP, cone property, arcs, Steiner) on a boundary.
    Check {
        /// Boundary polyline file (defaults to the configured preset; may
        /// also be given as a `boundary=FILE` override).
        #[arg(long, value_name = "FILE")]
        boundary: Option<PathBuf>,
        /// Write the continuous Steiner symmetrization at this t to
        /// `<out_dir>/steiner.txt`.
        #[arg(long, value_name = "T")]
        steiner: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<(), CliError> {
        match &cli.command {
            Command::Solve(common) => cmd_solve(&load_config(common)?),
            Command::Minimize(common) => cmd_minimize(&load_config(common)?),
            Command::Sweep(common) => cmd_sweep(&load_config(common)?),
            Command::Check {
                boundary,
                steiner,
                common,
            } => {
                let mut cfg = load_config(common)?;
                if let Some(path) = boundary {
                    cfg.boundary = Some(path.clone());
                }
                cmd_check(&cfg, *steiner)
            }
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Error annotated with the process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidDomain(_)
            | Error::Io(_) => 2,
            Error::SolveNotConverged { .. }
            | Error::ChargePlacement { .. }
            | Error::OutsideDomain { .. }
            | Error::OnSegment { .. } => 3,
            Error::ProjectionFailed { .. } | Error::BoundaryCrossedSegment => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        cfg.apply_file(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    cfg.apply_overrides(&common.overrides)
        .map_err(CliError::input)?;
    cfg.validate().map_err(CliError::input)?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    let file = File::create(dir.join(name)).map_err(Error::from)?;
    Ok(BufWriter::new(file))
}

/// One arc row of the solve/minimize summaries.
#[derive(Serialize, Deserialize)]
struct ArcSummary {
    arc_type: String,
    side: String,
    center_x: f64,
    radius: f64,
    nodes: usize,
}

fn arc_summaries(d: &GraphDomain) -> Vec<ArcSummary> {
    let loop_len = d.boundary().len();
    geometry::classify_arcs(d, 1e-3)
        .into_iter()
        .map(|arc| ArcSummary {
            arc_type: format!("{:?}", arc.arc_type),
            side: format!("{:?}", arc.side),
            center_x: arc.center.x,
            radius: arc.radius,
            nodes: arc.node_count(loop_len),
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SolveSummary {
    a: f64,
    k: f64,
    n: usize,
    gauss_flux: f64,
    gauss_flux_predicted: f64,
    residual_dirichlet: f64,
    condition: f64,
    perimeter: f64,
    area: f64,
    clearance: f64,
    arcs: Vec<ArcSummary>,
}

fn write_flux_csv<W: Write>(mut w: W, field: &qsurf::BoundaryField) -> Result<(), Error> {
    writeln!(w, "x,y,nx,ny,weight,flux,g")?;
    for j in 0..field.nodes.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt17(field.nodes[j].x),
            fmt17(field.nodes[j].y),
            fmt17(field.normals[j].x),
            fmt17(field.normals[j].y),
            fmt17(field.weights[j]),
            fmt17(field.flux[j]),
            fmt17(field.g[j]),
        )?;
    }
    Ok(())
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let d = cfg.domain()?;
    let src = LineSource::new(cfg.a)?;
    let sol = potential::solve_dirichlet(&d, &src, &cfg.solve_options())?;
    let field = shape_opt::shape_gradient(&sol, cfg.k);

    let summary = SolveSummary {
        a: cfg.a,
        k: cfg.k,
        n: d.n(),
        gauss_flux: field.gauss_flux(),
        gauss_flux_predicted: 2.0 * cfg.a,
        residual_dirichlet: sol.residual_dirichlet(),
        condition: sol.condition(),
        perimeter: geometry::perimeter(&d),
        area: geometry::area(&d),
        clearance: geometry::clearance(&d),
        arcs: arc_summaries(&d),
    };

    serde_json::to_writer_pretty(create(&cfg.out_dir, "solve_summary.json")?, &summary)
        .map_err(|e| CliError::input(e.to_string()))?;
    write_flux_csv(create(&cfg.out_dir, "flux_profile.csv")?, &field)?;
    if cfg.grid_nx > 1 && cfg.grid_ny > 1 {
        write_field_samples(cfg, &d, &sol)?;
    }

    println!("gauss_flux = {}", fmt17(summary.gauss_flux));
    println!(
        "gauss_flux_predicted = {}",
        fmt17(summary.gauss_flux_predicted)
    );
    println!("residual_dirichlet = {}", fmt17(summary.residual_dirichlet));
    let type_one = summary.arcs.iter().filter(|a| a.arc_type == "I").count();
    println!("arcs: {} total, {} type I", summary.arcs.len(), type_one);
    Ok(())
}

/// Potential samples on a regular grid over the domain's bounding box;
/// rows outside the domain are skipped.
fn write_field_samples(
    cfg: &RunConfig,
    d: &GraphDomain,
    sol: &potential::HarmonicSolution,
) -> Result<(), CliError> {
    let mut w = create(&cfg.out_dir, "field_samples.csv")?;
    writeln!(w, "x,y,u").map_err(Error::from)?;
    let (y_min, y_max) = d
        .lower()
        .iter()
        .chain(d.upper())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    for iy in 0..cfg.grid_ny {
        let y = y_min + (y_max - y_min) * iy as f64 / (cfg.grid_ny - 1) as f64;
        for ix in 0..cfg.grid_nx {
            let x = d.x_left() + (d.x_right() - d.x_left()) * ix as f64 / (cfg.grid_nx - 1) as f64;
            if let Ok(u) = sol.eval_u(Vec2::new(x, y)) {
                writeln!(w, "{},{},{}", fmt17(x), fmt17(y), fmt17(u)).map_err(Error::from)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct VerificationBlock {
    /// Relative deviation from the perimeter identity `k|∂Ω| = 2a`
    /// (absent when the run did not converge).
    perimeter_identity_deviation: Option<f64>,
    symmetry: f64,
    /// Smallest monotone-basis integral over Type I arcs, in units of
    /// `(arc length)·k²`; `None` when no Type I arc is detected.
    arc_min_integral_scaled: Option<f64>,
    arc_sup_residual: Option<f64>,
    type_one_arcs: usize,
    all_pass: bool,
}

#[derive(Serialize, Deserialize)]
struct MinimizeSummary {
    a: f64,
    k: f64,
    status: String,
    iterations: usize,
    residual: f64,
    clearance: f64,
    perimeter: f64,
    perimeter_predicted: f64,
    area: f64,
    j_history: Vec<f64>,
    verification: VerificationBlock,
    arcs: Vec<ArcSummary>,
}

fn verification_block(r: &MinimizeResult, k: f64) -> VerificationBlock {
    let perimeter_identity_deviation = analysis::verify_perimeter_identity(r, k).ok();
    let symmetry = analysis::verify_symmetry(r);
    let arc_report = analysis::arc_optimality_check(r, k);
    let arc_min_integral_scaled = arc_report
        .arcs
        .iter()
        .map(|c| c.min_integral / (c.arc_length * k * k))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let arc_sup_residual = arc_report
        .arcs
        .iter()
        .map(|c| c.sup_residual)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let all_pass = r.status == MinimizeStatus::Converged
        && perimeter_identity_deviation.is_some_and(|d| d < 0.02)
        && symmetry < 1e-3
        && arc_min_integral_scaled.is_none_or(|v| v >= -1e-6)
        && arc_sup_residual.is_none_or(|v| v < 1e-2);
    VerificationBlock {
        perimeter_identity_deviation,
        symmetry,
        arc_min_integral_scaled,
        arc_sup_residual,
        type_one_arcs: arc_report.arcs.len(),
        all_pass,
    }
}

fn cmd_minimize(cfg: &RunConfig) -> Result<(), CliError> {
    let d0 = cfg.domain()?;
    let src = LineSource::new(cfg.a)?;
    let r = shape_opt::minimize(&d0, &src, cfg.k, &cfg.minimize_options())?;

    r.domain
        .write_polyline(create(&cfg.out_dir, "boundary.txt")?)?;
    let field = shape_opt::shape_gradient(&r.solution, cfg.k);
    write_flux_csv(create(&cfg.out_dir, "flux_residual.csv")?, &field)?;

    let verification = verification_block(&r, cfg.k);
    let summary = MinimizeSummary {
        a: cfg.a,
        k: cfg.k,
        status: status_str(r.status).to_string(),
        iterations: r.iterations,
        residual: r.residual,
        clearance: r.clearance,
        perimeter: geometry::perimeter(&r.domain),
        perimeter_predicted: 2.0 * cfg.a / cfg.k,
        area: geometry::area(&r.domain),
        j_history: r.j_history.clone(),
        verification,
        arcs: arc_summaries(&r.domain),
    };
    serde_json::to_writer_pretty(create(&cfg.out_dir, "minimize_result.json")?, &summary)
        .map_err(|e| CliError::input(e.to_string()))?;

    println!("status = {}", summary.status);
    println!("iterations = {}", summary.iterations);
    println!("residual = {}", fmt17(summary.residual));
    println!("clearance = {}", fmt17(summary.clearance));
    println!("perimeter = {}", fmt17(summary.perimeter));
    println!(
        "verification = {}",
        if summary.verification.all_pass {
            "all-pass"
        } else {
            "not-applicable-or-failed"
        }
    );
    Ok(())
}

fn status_str(s: MinimizeStatus) -> &'static str {
    match s {
        MinimizeStatus::Converged => "converged",
        MinimizeStatus::CollapsedOntoC => "collapsed-onto-c",
        MinimizeStatus::MaxIterations => "max-iterations",
    }
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.ratios.is_empty() {
        return Err(CliError::input("ratios must be nonempty for sweep"));
    }
    let opts = SweepOptions {
        clearance_min: cfg.clearance_min,
        bracket_width: cfg.bracket_width,
        workers: cfg.workers,
        n: cfg.n,
        initial_radius: cfg.radius,
        minimize: cfg.minimize_options(),
    };
    let report = analysis::threshold_sweep(&cfg.ratios, &opts)?;

    report.write_csv(create(&cfg.out_dir, "sweep.csv")?)?;
    report.write_json(create(&cfg.out_dir, "sweep.json")?)?;

    let [exact, suff1, suff2] = report.markers;
    println!(
        "markers: threshold {} sufficiency {} {}",
        fmt17(exact),
        fmt17(suff1),
        fmt17(suff2)
    );
    match report.critical_ratio_bracket {
        Some((lo, hi)) => println!("bracket = [{}, {}]", fmt17(lo), fmt17(hi)),
        None => println!("bracket-not-found"),
    }
    Ok(())
}

fn cmd_check(cfg: &RunConfig, steiner: Option<f64>) -> Result<(), CliError> {
    let d = cfg.domain()?;
    let gnp = geometry::check_gnp(&d, 1e-6);
    let (s_min, s_max) = gnp
        .s1
        .iter()
        .chain(&gnp.s2)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    println!("gnp = {}", if gnp.passed { "passed" } else { "failed" });
    println!("s_range = [{}, {}]", fmt17(s_min), fmt17(s_max));
    for v in &gnp.violations {
        println!(
            "violation: node {} side {:?} s = {}",
            v.index,
            v.side,
            fmt17(v.value)
        );
    }
    let csp = geometry::check_csp(&d, 256);
    println!("cone_property = {}", if csp { "passed" } else { "failed" });
    let arcs = arc_summaries(&d);
    println!("arcs: {}", arcs.len());
    for a in &arcs {
        println!(
            "arc: type {} side {} center_x {} radius {} nodes {}",
            a.arc_type,
            a.side,
            fmt17(a.center_x),
            fmt17(a.radius),
            a.nodes
        );
    }
    if let Some(t) = steiner {
        let sym = geometry::steiner_continuous(&d, t)?;
        sym.write_polyline(create(&cfg.out_dir, "steiner.txt")?)?;
        println!("area_before = {}", fmt17(geometry::area(&d)));
        println!("area_after = {}", fmt17(geometry::area(&sym)));
    }
    Ok(())
}
