//! Command-line front end. [`run`] parses arguments, dispatches and returns the
//! process exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use navsim_core::analysis::{
    attractivity_check, basin_statistics, degenerate_search, find_critical_points, growth_exponent, random_starts,
    DegenerateOutcome, DegenerateSearchOptions,
};
use navsim_core::sim::{simulate, Outcome, Scenario};
use navsim_core::{NavFunction, NavTransform, PointWorld, Vec2};
use serde_json::json;

use crate::field::{compute_field, write_field_csv};
use crate::output::{write_critical_points_csv, write_events_csv, write_trajectory_csv, OutputError, Summary};
use crate::scenario::{load_scenario, parse_scenario, ScenarioError};
use crate::svg::render_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_COLLISION: i32 = 3;
pub const EXIT_SADDLE_STALL: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_VALIDATION: i32 = 65;
pub const EXIT_NUMERIC: i32 = 70;
pub const EXIT_IO: i32 = 74;

pub const SEED_ENV: &str = "NAVSIM_SEED";

/// Three-obstacle world used by `analyze basins` when no scenario is given.
pub const DEFAULT_BASIN_SCENARIO: &str = include_str!("../scenarios/basins3.toml");

#[derive(Debug, Parser)]
#[command(name = "navsim", version, about = "Harmonic navigation functions with sector sensing")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write trajectory.csv, events.csv, summary.json and figure.svg.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the navigation function on a grid.
    Field {
        scenario: PathBuf,
        #[arg(long, default_value_t = 128)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Critical points, degeneracy, attractivity and basin statistics
    #[command(subcommand)]
    Analyze(Analyze),
    /// Compare the analytic workspace gradient with central differences.
    CheckGradients {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
struct WorldArgs {
    /// Scenario whose obstacles (all treated as known) define the point world.
    #[arg(long, conflicts_with_all = ["destination", "obstacle"])]
    scenario: Option<PathBuf>,
    /// Destination point, `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    destination: Option<Vec2>,
    /// Obstacle point, `x,y`; repeat for more.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    obstacle: Vec<Vec2>,
    /// Defaults to M + 1.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Analyze {
    /// Grid-seeded Newton search for critical points of the point-world potential.
    CriticalPoints {
        #[command(flatten)]
        world: WorldArgs,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the symmetric family for a degenerate critical point.
    Degenerate {
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        /// Keep the pairs at ±135° instead of freeing their angle.
        #[arg(long)]
        fixed_angle: bool,
    },
    /// Check growth of the potential at infinity.
    Attractivity {
        #[command(flatten)]
        world: WorldArgs,
    },
    /// Fraction of random starts that reach the destination.
    Basins {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let x: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let y: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Vec2::new(x, y))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Core(#[from] navsim_core::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use navsim_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Scenario(ScenarioError::Io { .. }) => EXIT_IO,
            CliError::Scenario(_) => EXIT_VALIDATION,
            CliError::Core(E::Numeric(_) | E::NearPole { .. }) => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Output(_) | CliError::Io { .. } => EXIT_IO,
            CliError::Check(_) => EXIT_NUMERIC,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Loads a scenario and applies the seed override from the environment.
pub fn load_with_env(path: &Path) -> Result<Scenario, CliError> {
    let mut s = load_scenario(path)?;
    apply_seed_env(&mut s)?;
    Ok(s)
}

fn apply_seed_env(s: &mut Scenario) -> Result<(), CliError> {
    if let Ok(v) = std::env::var(SEED_ENV) {
        s.rng_seed = v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
    }
    Ok(())
}

fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Arrived => EXIT_OK,
        Outcome::Timeout => EXIT_TIMEOUT,
        Outcome::Collision => EXIT_COLLISION,
        Outcome::SaddleStall => EXIT_SADDLE_STALL,
    }
}

/// Point world and `k` for the analysis subcommands.
fn world(args: &WorldArgs) -> Result<(PointWorld, u32), CliError> {
    let pw = if let Some(path) = &args.scenario {
        let mut ws = load_with_env(path)?.workspace;
        for i in 0..ws.obstacles().len() {
            ws.mark_known(i);
        }
        NavTransform::new(&ws)?.point_world().clone()
    } else {
        let d = args.destination.ok_or_else(|| CliError::Usage("give --scenario or --destination".into()))?;
        PointWorld::new(args.obstacle.clone(), d)
    };
    let k = args.k.unwrap_or(pw.count() as u32 + 1);
    if k == 0 {
        return Err(CliError::Usage("--k must be positive".into()));
    }
    Ok((pw, k))
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Check(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_err(Path::new("<stdout>")))
}

fn cmd_simulate(scenario: &Path, out_dir: &Path, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let sc = load_with_env(scenario)?;
    let tr = simulate(&sc)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let p = out_dir.join("trajectory.csv");
    write_trajectory_csv(create(&p)?, &tr.samples)?;
    let p = out_dir.join("events.csv");
    write_events_csv(create(&p)?, &tr.events)?;
    let summary = Summary::new(&sc, &tr);
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Check(e.to_string()))?;
    let p = out_dir.join("summary.json");
    std::fs::write(&p, format!("{text}\n")).map_err(io_err(&p))?;
    let p = out_dir.join("figure.svg");
    std::fs::write(&p, render_svg(&sc, &tr)).map_err(io_err(&p))?;
    writeln!(stdout, "{text}").map_err(io_err(Path::new("<stdout>")))?;
    Ok(outcome_code(tr.outcome))
}

fn cmd_field(scenario: &Path, res: usize, out: &Path) -> Result<i32, CliError> {
    let sc = load_with_env(scenario)?;
    let grid = compute_field(&sc, res).map_err(|e| match e {
        navsim_core::Error::InvalidParameter(m) => CliError::Usage(m.into()),
        e => e.into(),
    })?;
    write_field_csv(create(out)?, &grid)?;
    Ok(EXIT_OK)
}

/// Largest relative mismatch between the analytic gradient of Θ and central
/// differences at seeded random free points.
pub fn gradient_check(sc: &Scenario, samples: usize) -> Result<(f64, usize), CliError> {
    let mut ws = sc.workspace.clone();
    for i in 0..ws.obstacles().len() {
        ws.mark_known(i);
    }
    let nf = NavFunction::for_workspace(&ws)?;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for x in random_starts(sc, samples, sc.rng_seed) {
        let g = match nf.gradient(x) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let f = |d: Vec2| nf.value(x + d);
        let (Ok(xp), Ok(xm), Ok(yp), Ok(ym)) =
            (f(Vec2::new(h, 0.0)), f(Vec2::new(-h, 0.0)), f(Vec2::new(0.0, h)), f(Vec2::new(0.0, -h)))
        else {
            continue;
        };
        let fd = Vec2::new((xp - xm) / (2.0 * h), (yp - ym) / (2.0 * h));
        worst = worst.max(g.distance(fd) / g.norm().max(1e-6));
        used += 1;
    }
    Ok((worst, used))
}

/// Relative tolerance used by `check-gradients`.
pub const GRADIENT_CHECK_TOL: f64 = 1e-5;

fn cmd_check_gradients(scenario: &Path, samples: usize, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let sc = load_with_env(scenario)?;
    let (worst, used) = gradient_check(&sc, samples)?;
    let pass = worst < GRADIENT_CHECK_TOL;
    print_json(stdout, &json!({ "samples": used, "max_rel_error": worst, "tolerance": GRADIENT_CHECK_TOL, "pass": pass }))?;
    Ok(if pass { EXIT_OK } else { EXIT_NUMERIC })
}

fn cmd_analyze(a: Analyze, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match a {
        Analyze::CriticalPoints { world: w, grid, out } => {
            let (pw, k) = world(&w)?;
            let cps = find_critical_points(&pw, k, grid).map_err(|e| CliError::Usage(e.to_string()))?;
            match out {
                Some(p) => write_critical_points_csv(create(&p)?, &cps)?,
                None => write_critical_points_csv(&mut *stdout, &cps)?,
            }
        }
        Analyze::Degenerate { k, pairs, fixed_angle } => {
            let opts = DegenerateSearchOptions { free_pair_angle: !fixed_angle, ..Default::default() };
            let outcome = degenerate_search(k, pairs, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
            let a = outcome.arrangement();
            let (status, best) = match &outcome {
                DegenerateOutcome::Found(_) => ("found", None),
                DegenerateOutcome::NotFound { best_residual, .. } => ("not_found", Some(*best_residual)),
            };
            print_json(
                stdout,
                &json!({
                    "status": status,
                    "k": k,
                    "pairs": pairs,
                    "pair_angle_deg": a.pair_angle.to_degrees(),
                    "point": [a.point.x, a.point.y],
                    "destination": [a.point_world.destination.x, a.point_world.destination.y],
                    "obstacles": a.point_world.obstacle_points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
                    "gradient_norm": a.gradient_norm,
                    "lambda": a.report.lambda_scalar,
                    "lambda_residual": a.lambda_residual,
                    "hessian_frobenius": a.report.hessian_frobenius,
                    "distance_ratio_residual": a.distance_ratio_residual,
                    "closed_form_residual": a.closed_form_residual,
                    "best_residual": best,
                }),
            )?;
        }
        Analyze::Attractivity { world: w } => {
            let (pw, k) = world(&w)?;
            print_json(
                stdout,
                &json!({
                    "obstacles": pw.count(),
                    "k": k,
                    "attractive": attractivity_check(&pw, k),
                    "growth_exponent": growth_exponent(&pw, k),
                }),
            )?;
        }
        Analyze::Basins { scenario, trials, seed } => {
            let mut sc = match &scenario {
                Some(p) => load_with_env(p)?,
                None => {
                    let mut s = parse_scenario(DEFAULT_BASIN_SCENARIO, "basins3.toml")?;
                    apply_seed_env(&mut s)?;
                    s
                }
            };
            if let Some(s) = seed {
                sc.rng_seed = s;
            }
            let r = basin_statistics(&sc, trials, sc.rng_seed).map_err(|e| CliError::Usage(e.to_string()))?;
            print_json(
                stdout,
                &json!({
                    "trials": r.trials,
                    "seed": sc.rng_seed,
                    "arrived": r.arrived,
                    "saddle_stall": r.saddle_stall,
                    "collision": r.collision,
                    "timeout": r.timeout,
                    "fraction": r.fraction,
                }),
            )?;
        }
    }
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { scenario, out } => cmd_simulate(&scenario, &out, stdout),
        Command::Field { scenario, res, out } => cmd_field(&scenario, res, &out),
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::CheckGradients { scenario, samples } => cmd_check_gradients(&scenario, samples, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
