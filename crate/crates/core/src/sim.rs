//! Deterministic closed-loop simulation with sector sensing and on-the-fly
//! obstacle discovery.
//!
//! Sensing runs at every step boundary. A newly registered obstacle rebuilds
//! the navigation function (new collapse annulus, new point obstacle and
//! `k = n + 1`) before the next step is integrated. At most one obstacle is
//! registered per step, so discovery instants are separated by at least `dt`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::control::{
    critical_damping, dissipation, dynamic_law, kinematic_law, ControlParams, DampingMode, DampingState,
    GRADIENT_EPS,
};
use crate::error::{Error, Result};
use crate::geometry::{min_detection_distance, SensingSector, Vec2, Workspace};
use crate::navtrans::{plan_neighborhoods, CollapseNeighborhood};
use crate::potential::NavFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobotModel {
    /// `ẋ = u`
    Kinematic,
    /// `m ẍ = f`
    Dynamic { mass: f64 },
}

/// Range (m) and aperture (rad) of the symmetric sensing sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    pub range: f64,
    pub aperture: f64,
}

impl SensorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.range > 0.0) || !self.range.is_finite() {
            return Err(Error::InvalidParameter("sensor range must be positive"));
        }
        if !(self.aperture > 0.0 && self.aperture <= TAU) {
            return Err(Error::InvalidParameter("sensor aperture must lie in (0, 360] degrees"));
        }
        Ok(())
    }

    pub fn sector(&self, pole: Vec2, axis: Vec2) -> Result<SensingSector> {
        SensingSector::new(self.range, self.aperture, pole, axis)
    }

    pub fn d_min(&self, rho_min: f64) -> Result<f64> {
        min_detection_distance(self.range, self.aperture, rho_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub arrival_tolerance: f64,
    pub integrator: Integrator,
    /// Nudge the robot by 1e-9 m whenever it sits on an exact critical point.
    pub perturb_saddles: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-3, t_max: 120.0, arrival_tolerance: 1e-3, integrator: Integrator::Rk4, perturb_saddles: false }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(Error::InvalidParameter("dt must lie in (0, 0.01]"));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter("t_max must be positive"));
        }
        if !(self.arrival_tolerance > 0.0) {
            return Err(Error::InvalidParameter("arrival tolerance must be positive"));
        }
        Ok(())
    }
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub workspace: Workspace,
    pub start: Vec2,
    pub robot: RobotModel,
    pub control: ControlParams,
    pub sensor: SensorParams,
    pub sim: SimConfig,
    pub rng_seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || self.workspace.clearance(self.start) <= 0.0 {
            return Err(Error::StartNotFree);
        }
        plan_neighborhoods(&self.workspace)?;
        self.control.validate()?;
        self.sensor.validate()?;
        self.sim.validate()?;
        if let RobotModel::Dynamic { mass } = self.robot {
            if !(mass > 0.0) {
                return Err(Error::InvalidParameter("mass must be positive"));
            }
        }
        Ok(())
    }

    /// Worst-case detection distance for this sensor and workspace.
    pub fn d_min(&self) -> Result<f64> {
        self.sensor.d_min(self.workspace.rho_min())
    }
}

/// One logged step boundary. For the kinematic robot `energy` is `Θ` and
/// `lambda` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub theta: f64,
    pub energy: f64,
    pub n: usize,
    pub k: u32,
    pub lambda: f64,
}

impl Sample {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn speed(&self) -> f64 {
        Vec2::new(self.vx, self.vy).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryEvent {
    pub time: f64,
    pub obstacle_index: usize,
    pub speed_at_discovery: f64,
    pub k_after: u32,
    /// Robot position and sector axis at the discovery instant.
    pub position: Vec2,
    pub axis: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Arrived,
    Timeout,
    Collision,
    SaddleStall,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Arrived => "arrived",
            Outcome::Timeout => "timeout",
            Outcome::Collision => "collision",
            Outcome::SaddleStall => "saddle_stall",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<DiscoveryEvent>,
    pub outcome: Outcome,
    /// Smallest clearance over all logged positions.
    pub min_clearance: f64,
    /// Sector axis at the last logged sample.
    pub final_axis: Vec2,
}

impl Trajectory {
    pub fn max_speed(&self) -> f64 {
        self.samples.iter().map(Sample::speed).fold(0.0, f64::max)
    }

    /// Index ranges of samples that share the same navigation function.
    pub fn segments(&self) -> Vec<core::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..self.samples.len() {
            if self.samples[i].n != self.samples[i - 1].n {
                out.push(start..i);
                start = i;
            }
        }
        if !self.samples.is_empty() {
            out.push(start..self.samples.len());
        }
        out
    }
}

/// Unknown obstacles intersecting `sector`, nearest first.
pub fn detect_unknown(workspace: &Workspace, sector: &SensingSector) -> Vec<usize> {
    let mut hits: Vec<usize> = workspace
        .obstacles()
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.known && sector.detects_disk(o))
        .map(|(i, _)| i)
        .collect();
    let pole = sector.pole();
    hits.sort_by(|&a, &b| {
        let ca = workspace.obstacles()[a].clearance(pole);
        let cb = workspace.obstacles()[b].clearance(pole);
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    hits
}

/// Marks every unknown obstacle intersecting the sector as known and returns
/// the newly known indices. Known obstacles stay known.
pub fn sense_and_register(
    workspace: &mut Workspace,
    pose: Vec2,
    axis: Vec2,
    sensor: &SensorParams,
) -> Result<Vec<usize>> {
    let sector = sensor.sector(pose, axis)?;
    let hits = detect_unknown(workspace, &sector);
    for &i in &hits {
        workspace.mark_known(i);
    }
    Ok(hits)
}

/// Marks obstacles whose clearance from `start` is below `d_min` as known.
pub fn initialize_known(workspace: &Workspace, start: Vec2, sensor: &SensorParams) -> Result<Workspace> {
    if workspace.clearance(start) <= 0.0 {
        return Err(Error::StartNotFree);
    }
    let d_min = sensor.d_min(workspace.rho_min())?;
    let mut ws = workspace.clone();
    for i in 0..ws.obstacles().len() {
        if ws.obstacles()[i].clearance(start) < d_min {
            ws.mark_known(i);
        }
    }
    Ok(ws)
}

/// Consecutive near-zero-gradient steps after which a run counts as stalled.
pub const STALL_STEPS: usize = 1000;
const SADDLE_NUDGE: Vec2 = Vec2::new(1e-9, 0.0);

/// Mutable bookkeeping shared by both robot models.
struct Runner {
    workspace: Workspace,
    plan: Vec<CollapseNeighborhood>,
    nf: NavFunction,
    pending: VecDeque<usize>,
    sensor: SensorParams,
    axis: Vec2,
    events: Vec<DiscoveryEvent>,
    min_clearance: f64,
}

impl Runner {
    fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let workspace = initialize_known(&scenario.workspace, scenario.start, &scenario.sensor)?;
        let plan = plan_neighborhoods(&workspace)?;
        let nf = NavFunction::for_workspace(&workspace)?;
        Ok(Runner {
            workspace,
            plan,
            nf,
            pending: VecDeque::new(),
            sensor: scenario.sensor,
            axis: Vec2::new(1.0, 0.0),
            events: Vec::new(),
            min_clearance: f64::INFINITY,
        })
    }

    /// Senses with the current axis and registers at most one obstacle.
    fn sense(&mut self, position: Vec2, time: f64, speed: f64) -> Result<bool> {
        let sector = self.sensor.sector(position, self.axis)?;
        for i in detect_unknown(&self.workspace, &sector) {
            if !self.pending.contains(&i) {
                self.pending.push_back(i);
            }
        }
        let Some(i) = self.pending.pop_front() else {
            return Ok(false);
        };
        self.workspace.mark_known(i);
        let transform = self.nf.transform().with_neighborhood(self.plan[i])?;
        self.nf = NavFunction::new(transform);
        self.events.push(DiscoveryEvent {
            time,
            obstacle_index: i,
            speed_at_discovery: speed,
            k_after: self.nf.k(),
            position,
            axis: self.axis,
        });
        Ok(true)
    }

    fn known(&self) -> usize {
        self.nf.point_world().count()
    }

    fn finish(self, samples: Vec<Sample>, outcome: Outcome) -> Trajectory {
        Trajectory { samples, events: self.events, outcome, min_clearance: self.min_clearance, final_axis: self.axis }
    }
}

fn is_collision(e: &Error) -> bool {
    matches!(e, Error::InsideObstacle { .. } | Error::OutsideWorkspace | Error::NearPole { .. })
}

fn check_finite(v: Vec2) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric("state diverged"))
    }
}

/// Integrates `ẋ = u` under the kinematic law.
pub fn simulate_kinematic(scenario: &Scenario) -> Result<Trajectory> {
    let mut run = Runner::new(scenario)?;
    let cfg = scenario.sim;
    let gain = scenario.control.gain;
    let dest = scenario.workspace.destination();
    let mut x = scenario.start;
    let mut samples = Vec::new();
    let mut stall = 0usize;
    let max_steps = steps_for(cfg);

    macro_rules! try_eval {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) if is_collision(&e) => return Ok(run.finish(samples, Outcome::Collision)),
                Err(e) => return Err(e),
            }
        };
    }

    let (level, g) = try_eval!(run.nf.eval(x));
    if let Some(a) = (-g).normalized() {
        run.axis = a;
    }
    for step in 0..=max_steps {
        let t = step as f64 * cfg.dt;
        let clearance = scenario.workspace.clearance(x);
        run.min_clearance = run.min_clearance.min(clearance);
        if clearance <= 0.0 {
            return Ok(run.finish(samples, Outcome::Collision));
        }
        let (mut level, mut g) = if step == 0 { (level, g) } else { try_eval!(run.nf.eval(x)) };
        let mut u = kinematic_law(level, g, gain);
        if let Some(a) = u.normalized() {
            run.axis = a;
        }
        if run.sense(x, t, u.norm())? {
            (level, g) = try_eval!(run.nf.eval(x));
            u = kinematic_law(level, g, gain);
        }
        samples.push(Sample {
            t,
            x: x.x,
            y: x.y,
            vx: u.x,
            vy: u.y,
            theta: level,
            energy: level,
            n: run.known(),
            k: run.nf.k(),
            lambda: 0.0,
        });
        if x.distance(dest) < cfg.arrival_tolerance {
            return Ok(run.finish(samples, Outcome::Arrived));
        }
        if step == max_steps {
            break;
        }
        if g.norm() < GRADIENT_EPS {
            stall += 1;
            if stall >= STALL_STEPS {
                return Ok(run.finish(samples, Outcome::SaddleStall));
            }
            if cfg.perturb_saddles {
                x += SADDLE_NUDGE;
                continue;
            }
        } else {
            stall = 0;
        }
        let f = |p: Vec2| run.nf.eval(p).map(|(l, g)| kinematic_law(l, g, gain));
        let k1 = u;
        let k2 = try_eval!(f(x + k1 * (0.5 * cfg.dt)));
        let k3 = try_eval!(f(x + k2 * (0.5 * cfg.dt)));
        let k4 = try_eval!(f(x + k3 * cfg.dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (cfg.dt / 6.0);
        check_finite(x)?;
    }
    Ok(run.finish(samples, Outcome::Timeout))
}

fn steps_for(cfg: SimConfig) -> usize {
    // Guard against t_max/dt landing a hair below an integer.
    libm::ceil(cfg.t_max / cfg.dt - 1e-9) as usize
}

/// Integrates `m ẍ = −μ∇Θ − λẋ` from rest, with `λ` chosen by the damping mode
/// and held constant within each step.
pub fn simulate_dynamic(scenario: &Scenario) -> Result<Trajectory> {
    let RobotModel::Dynamic { mass } = scenario.robot else {
        return Err(Error::InvalidParameter("dynamic simulation needs a dynamic robot"));
    };
    let mut run = Runner::new(scenario)?;
    let cfg = scenario.sim;
    let mu = scenario.control.mu;
    let dest = scenario.workspace.destination();
    let mut damping = DampingState { last_discovery_speed: 0.0, d_min: scenario.d_min()? };
    let mut x = scenario.start;
    let mut v = Vec2::ZERO;
    let mut samples = Vec::new();
    let mut stall = 0usize;
    let max_steps = steps_for(cfg);

    macro_rules! try_eval {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) if is_collision(&e) => return Ok(run.finish(samples, Outcome::Collision)),
                Err(e) => return Err(e),
            }
        };
    }

    let g0 = try_eval!(run.nf.gradient(x));
    if let Some(a) = (-g0).normalized() {
        run.axis = a;
    }
    for step in 0..=max_steps {
        let t = step as f64 * cfg.dt;
        let clearance = scenario.workspace.clearance(x);
        run.min_clearance = run.min_clearance.min(clearance);
        if clearance <= 0.0 {
            return Ok(run.finish(samples, Outcome::Collision));
        }
        if v.norm() > 1e-12 {
            run.axis = v.normalized().unwrap_or(run.axis);
        } else if let Ok(g) = run.nf.gradient(x) {
            // at rest: keep the last axis unless the field gives a direction
            if step == 0 {
                run.axis = (-g).normalized().unwrap_or(run.axis);
            }
        }
        if run.sense(x, t, v.norm())? {
            damping.last_discovery_speed = v.norm();
        }
        let (level, g) = try_eval!(run.nf.eval(x));
        let energy = mu * level + 0.5 * mass * v.norm_sq();
        let pw = run.nf.point_world();
        let k = run.nf.k();
        let lambda = match scenario.control.damping {
            DampingMode::Fixed(l) => l,
            DampingMode::Critical => critical_damping(mu, mass, pw, k),
            DampingMode::Scheduled => dissipation(&damping, energy, mu, mass, pw, k),
        };
        samples.push(Sample {
            t,
            x: x.x,
            y: x.y,
            vx: v.x,
            vy: v.y,
            theta: level,
            energy,
            n: run.known(),
            k,
            lambda,
        });
        if x.distance(dest) < cfg.arrival_tolerance {
            return Ok(run.finish(samples, Outcome::Arrived));
        }
        if step == max_steps {
            break;
        }
        if g.norm() < GRADIENT_EPS && v.norm() < GRADIENT_EPS {
            stall += 1;
            if stall >= STALL_STEPS {
                return Ok(run.finish(samples, Outcome::SaddleStall));
            }
            if cfg.perturb_saddles {
                x += SADDLE_NUDGE;
                continue;
            }
        } else {
            stall = 0;
        }
        let accel = |p: Vec2, vel: Vec2| run.nf.gradient(p).map(|g| dynamic_law(g, vel, mu, lambda) / mass);
        let h = cfg.dt;
        let a1 = dynamic_law(g, v, mu, lambda) / mass;
        let v1 = v;
        let v2 = v + a1 * (0.5 * h);
        let a2 = try_eval!(accel(x + v1 * (0.5 * h), v2));
        let v3 = v + a2 * (0.5 * h);
        let a3 = try_eval!(accel(x + v2 * (0.5 * h), v3));
        let v4 = v + a3 * h;
        let a4 = try_eval!(accel(x + v3 * h, v4));
        x += (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
        v += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        check_finite(x)?;
        check_finite(v)?;
    }
    Ok(run.finish(samples, Outcome::Timeout))
}

/// Runs the simulation matching the scenario's robot model.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory> {
    match scenario.robot {
        RobotModel::Kinematic => simulate_kinematic(scenario),
        RobotModel::Dynamic { .. } => simulate_dynamic(scenario),
    }
}
