//! TOML scenario files.
//!
//! Lengths are in metres, times in seconds and the sensor aperture in degrees.
//! Every invariant checked by the core types is reported with the line of the
//! offending entry.
//!
//! ```toml
//! start = [-2.5, 0.0]
//! rng_seed = 7
//!
//! [workspace]
//! outer_radius = 3.0
//! destination = [2.0, 0.5]
//!
//! [[workspace.obstacles]]
//! center = [0.0, 0.0]
//! radius = 0.4
//! known = false
//!
//! [robot]
//! model = "dynamic"
//! mass = 1.0
//!
//! [control]
//! gain = 1.0
//! mu = 10.0
//! damping = "scheduled"
//!
//! [sensor]
//! range = 1.0
//! aperture_deg = 60.0
//!
//! [sim]
//! dt = 0.001
//! t_max = 120.0
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use navsim_core::control::{ControlParams, DampingMode};
use navsim_core::navtrans::plan_neighborhoods;
use navsim_core::sim::{Integrator, RobotModel, Scenario, SensorParams, SimConfig};
use navsim_core::{DiskObstacle, Error as CoreError, Vec2, Workspace};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: parse error: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("{origin}:{line}: invalid scenario: {message}")]
    Invalid { origin: String, line: usize, message: String },
    #[error("cannot encode scenario: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileObstacle {
    center: [f64; 2],
    radius: f64,
    #[serde(default)]
    known: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileWorkspace {
    outer_radius: Spanned<f64>,
    destination: Spanned<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_min: Option<Spanned<f64>>,
    #[serde(default)]
    obstacles: Vec<Spanned<FileObstacle>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FileModel {
    Kinematic,
    Dynamic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRobot {
    model: FileModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FileDamping {
    Fixed,
    Critical,
    Scheduled,
}

fn default_gain() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    10.0
}
fn default_damping() -> FileDamping {
    FileDamping::Scheduled
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileControl {
    #[serde(default = "default_gain")]
    gain: f64,
    #[serde(default = "default_mu")]
    mu: f64,
    #[serde(default = "default_damping")]
    damping: FileDamping,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

impl Default for FileControl {
    fn default() -> Self {
        FileControl { gain: default_gain(), mu: default_mu(), damping: default_damping(), lambda: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSensor {
    range: f64,
    aperture_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FileIntegrator {
    Rk4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSim {
    #[serde(default = "defaults::dt")]
    dt: f64,
    #[serde(default = "defaults::t_max")]
    t_max: f64,
    #[serde(default = "defaults::tol")]
    arrival_tolerance: f64,
    #[serde(default = "defaults::integrator")]
    integrator: FileIntegrator,
    #[serde(default)]
    perturb_saddles: bool,
}

mod defaults {
    use super::FileIntegrator;
    use navsim_core::sim::SimConfig;

    pub fn dt() -> f64 {
        SimConfig::default().dt
    }
    pub fn t_max() -> f64 {
        SimConfig::default().t_max
    }
    pub fn tol() -> f64 {
        SimConfig::default().arrival_tolerance
    }
    pub fn integrator() -> FileIntegrator {
        FileIntegrator::Rk4
    }
}

impl Default for FileSim {
    fn default() -> Self {
        FileSim {
            dt: defaults::dt(),
            t_max: defaults::t_max(),
            arrival_tolerance: defaults::tol(),
            integrator: FileIntegrator::Rk4,
            perturb_saddles: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileScenario {
    start: Spanned<[f64; 2]>,
    #[serde(default)]
    rng_seed: u64,
    workspace: Spanned<FileWorkspace>,
    robot: Spanned<FileRobot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    control: Option<Spanned<FileControl>>,
    sensor: Spanned<FileSensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sim: Option<Spanned<FileSim>>,
}

fn line_of(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

fn v2(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

struct Ctx<'a> {
    text: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn invalid(&self, span: Range<usize>, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid { origin: self.origin.to_string(), line: line_of(self.text, span.start).0, message: message.into() }
    }
}

fn describe(e: &CoreError) -> String {
    match e {
        CoreError::ObstacleOverlap { a, b } => format!("obstacles {a} and {b} overlap"),
        CoreError::ObstacleOutsideBoundary { index } => format!("obstacle {index} is not strictly inside the outer boundary"),
        CoreError::DestinationNotFree => "destination is not in free space".to_string(),
        CoreError::StartNotFree => "start is not in free space".to_string(),
        CoreError::NeighborhoodInfeasible { index } => format!("no collapse neighbourhood fits around obstacle {index}"),
        other => other.to_string(),
    }
}

/// Parses and validates a scenario. `origin` names the source in messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let file: FileScenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_of(text, s.start));
        ScenarioError::Parse { origin: origin.to_string(), line, column, message: e.message().to_string() }
    })?;
    let ctx = Ctx { text, origin };
    let ws_file = file.workspace.get_ref();
    let obstacles: Vec<DiskObstacle> =
        ws_file.obstacles.iter().map(|o| DiskObstacle::new(v2(o.get_ref().center), o.get_ref().radius, o.get_ref().known)).collect();
    for (i, o) in ws_file.obstacles.iter().enumerate() {
        let r = o.get_ref().radius;
        if !(r > 0.0) || !r.is_finite() {
            return Err(ctx.invalid(o.span(), format!("obstacle {i} radius must be positive")));
        }
    }
    let obstacle_span = |i: usize| ws_file.obstacles.get(i).map_or(file.workspace.span(), |o| o.span());
    let mut workspace = Workspace::new(*ws_file.outer_radius.get_ref(), obstacles, v2(*ws_file.destination.get_ref()))
        .map_err(|e| {
            let span = match e {
                CoreError::ObstacleOverlap { b, .. } => obstacle_span(b),
                CoreError::ObstacleOutsideBoundary { index } => obstacle_span(index),
                CoreError::DestinationNotFree => ws_file.destination.span(),
                _ => ws_file.outer_radius.span(),
            };
            ctx.invalid(span, describe(&e))
        })?;
    if let Some(r) = &ws_file.rho_min {
        workspace = workspace.with_rho_min(*r.get_ref()).map_err(|e| ctx.invalid(r.span(), describe(&e)))?;
    }
    plan_neighborhoods(&workspace).map_err(|e| {
        let span = match e {
            CoreError::NeighborhoodInfeasible { index } => obstacle_span(index),
            _ => file.workspace.span(),
        };
        ctx.invalid(span, describe(&e))
    })?;

    let robot_file = file.robot.get_ref();
    let robot = match (robot_file.model, robot_file.mass) {
        (FileModel::Kinematic, None) => RobotModel::Kinematic,
        (FileModel::Kinematic, Some(_)) => return Err(ctx.invalid(file.robot.span(), "a kinematic robot takes no mass")),
        (FileModel::Dynamic, Some(m)) if m > 0.0 && m.is_finite() => RobotModel::Dynamic { mass: m },
        (FileModel::Dynamic, _) => return Err(ctx.invalid(file.robot.span(), "a dynamic robot needs a positive mass")),
    };

    let default_control = spanned(FileControl::default());
    let control_file = file.control.as_ref().unwrap_or(&default_control);
    let c = control_file.get_ref();
    let damping = match (c.damping, c.lambda) {
        (FileDamping::Fixed, Some(l)) => DampingMode::Fixed(l),
        (FileDamping::Fixed, None) => return Err(ctx.invalid(control_file.span(), "fixed damping needs lambda")),
        (_, Some(_)) => return Err(ctx.invalid(control_file.span(), "lambda is only used with fixed damping")),
        (FileDamping::Critical, None) => DampingMode::Critical,
        (FileDamping::Scheduled, None) => DampingMode::Scheduled,
    };
    let control = ControlParams { gain: c.gain, mu: c.mu, damping };
    control.validate().map_err(|e| ctx.invalid(control_file.span(), describe(&e)))?;

    let s = file.sensor.get_ref();
    let sensor = SensorParams { range: s.range, aperture: s.aperture_deg.to_radians() };
    sensor.validate().map_err(|e| ctx.invalid(file.sensor.span(), describe(&e)))?;

    let default_sim = spanned(FileSim::default());
    let sim_file = file.sim.as_ref().unwrap_or(&default_sim);
    let sf = sim_file.get_ref();
    let sim = SimConfig {
        dt: sf.dt,
        t_max: sf.t_max,
        arrival_tolerance: sf.arrival_tolerance,
        integrator: match sf.integrator {
            FileIntegrator::Rk4 => Integrator::Rk4,
        },
        perturb_saddles: sf.perturb_saddles,
    };
    sim.validate().map_err(|e| ctx.invalid(sim_file.span(), describe(&e)))?;

    let scenario = Scenario { workspace, start: v2(*file.start.get_ref()), robot, control, sensor, sim, rng_seed: file.rng_seed };
    scenario.validate().map_err(|e| ctx.invalid(file.start.span(), describe(&e)))?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Degrees value that converts back to exactly `rad`.
fn exact_degrees(rad: f64) -> Result<f64, ScenarioError> {
    let d = rad.to_degrees();
    let mut lo = d;
    let mut hi = d;
    for _ in 0..64 {
        if lo.to_radians() == rad {
            return Ok(lo);
        }
        if hi.to_radians() == rad {
            return Ok(hi);
        }
        lo = lo.next_down();
        hi = hi.next_up();
    }
    Err(ScenarioError::Encode(format!("aperture {rad} rad has no exact degree representation")))
}

fn spanned<T>(v: T) -> Spanned<T> {
    Spanned::new(0..0, v)
}

/// Serialises a scenario so that [`parse_scenario`] returns an identical value.
pub fn scenario_to_toml(s: &Scenario) -> Result<String, ScenarioError> {
    let ws = &s.workspace;
    let file = FileScenario {
        start: spanned([s.start.x, s.start.y]),
        rng_seed: s.rng_seed,
        workspace: spanned(FileWorkspace {
            outer_radius: spanned(ws.outer_radius()),
            destination: spanned([ws.destination().x, ws.destination().y]),
            rho_min: Some(spanned(ws.rho_min())),
            obstacles: ws
                .obstacles()
                .iter()
                .map(|o| spanned(FileObstacle { center: [o.center.x, o.center.y], radius: o.radius, known: o.known }))
                .collect(),
        }),
        robot: spanned(match s.robot {
            RobotModel::Kinematic => FileRobot { model: FileModel::Kinematic, mass: None },
            RobotModel::Dynamic { mass } => FileRobot { model: FileModel::Dynamic, mass: Some(mass) },
        }),
        control: Some(spanned(FileControl {
            gain: s.control.gain,
            mu: s.control.mu,
            damping: match s.control.damping {
                DampingMode::Fixed(_) => FileDamping::Fixed,
                DampingMode::Critical => FileDamping::Critical,
                DampingMode::Scheduled => FileDamping::Scheduled,
            },
            lambda: match s.control.damping {
                DampingMode::Fixed(l) => Some(l),
                _ => None,
            },
        })),
        sensor: spanned(FileSensor { range: s.sensor.range, aperture_deg: exact_degrees(s.sensor.aperture)? }),
        sim: Some(spanned(FileSim {
            dt: s.sim.dt,
            t_max: s.sim.t_max,
            arrival_tolerance: s.sim.arrival_tolerance,
            integrator: FileIntegrator::Rk4,
            perturb_saddles: s.sim.perturb_saddles,
        })),
    };
    toml::to_string(&file).map_err(|e| ScenarioError::Encode(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
start = [-1.0, 0.0]

[workspace]
outer_radius = 2.0
destination = [1.0, 0.0]

[robot]
model = "kinematic"

[sensor]
range = 1.0
aperture_deg = 60.0
"#;

    #[test]
    fn minimal_loads_with_defaults() {
        let s = parse_scenario(MINIMAL, "mem").unwrap();
        assert_eq!(s.sim, SimConfig::default());
        assert_eq!(s.robot, RobotModel::Kinematic);
        assert!((s.sensor.aperture - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert_eq!(s.workspace.rho_min(), 2.0);
    }

    #[test]
    fn line_numbers_point_at_entries() {
        let text = format!(
            "{MINIMAL}\n[[workspace.obstacles]]\ncenter = [0.0, 0.5]\nradius = 0.3\n\n[[workspace.obstacles]]\ncenter = [0.0, 0.8]\nradius = 0.3\n"
        );
        let err = parse_scenario(&text, "mem").unwrap_err();
        let ScenarioError::Invalid { line, message, .. } = &err else { panic!("{err}") };
        assert!(message.contains("0 and 1"), "{message}");
        // the span starts at the header of the second entry
        assert_eq!(text.lines().nth(line - 1).unwrap(), "[[workspace.obstacles]]");
        assert_eq!(text.lines().nth(*line).unwrap(), "center = [0.0, 0.8]");

        let bad = MINIMAL.replace("range = 1.0", "range = \"far\"");
        let ScenarioError::Parse { line, .. } = parse_scenario(&bad, "mem").unwrap_err() else { panic!() };
        assert!(bad.lines().nth(line - 1).unwrap().starts_with("range"));
    }

    #[test]
    fn exact_degrees_round_trip() {
        for rad in [std::f64::consts::FRAC_PI_3, 1.0, 0.123456789, std::f64::consts::TAU] {
            assert_eq!(exact_degrees(rad).unwrap().to_radians(), rad);
        }
    }
}
