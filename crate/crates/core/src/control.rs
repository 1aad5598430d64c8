//! Feedback laws for the kinematic and the dynamic point robot.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::math;
use crate::navtrans::PointWorld;
use crate::potential::NavFunction;
use crate::sim::RobotState;

/// Below this gradient norm the kinematic law treats the point as critical.
pub const GRADIENT_EPS: f64 = 1e-12;
/// Below this level the kinematic law treats the robot as arrived.
pub const LEVEL_EPS: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingMode {
    Fixed(f64),
    /// Constant critical damping for the current point world.
    Critical,
    /// Energy-triggered schedule: critical below `V = μ`, stopping-distance
    /// damping at or above it.
    Scheduled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Kinematic gain `K`.
    pub gain: f64,
    /// Potential weight `μ`.
    pub mu: f64,
    pub damping: DampingMode,
}

impl ControlParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0) || !(self.mu > 0.0) {
            return Err(Error::InvalidParameter("control gains must be positive"));
        }
        if let DampingMode::Fixed(l) = self.damping {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter("fixed damping must be positive"));
            }
        }
        Ok(())
    }
}

/// Speed recorded at the latest discovery and the worst-case detection distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingState {
    pub last_discovery_speed: f64,
    pub d_min: f64,
}

/// `u = −K √(2Θ) ∇Θ/‖∇Θ‖` given `Θ` and `∇Θ`. The speed depends on the level
/// only, so the field does not fade near saddle points.
pub fn kinematic_law(level: f64, gradient: Vec2, gain: f64) -> Vec2 {
    let n = gradient.norm();
    if n < GRADIENT_EPS || level < LEVEL_EPS {
        return Vec2::ZERO;
    }
    gradient * (-gain * math::sqrt(2.0 * level) / n)
}

pub fn kinematic_control(x: Vec2, nf: &NavFunction, gain: f64) -> Result<Vec2> {
    let (level, g) = nf.eval(x)?;
    Ok(kinematic_law(level, g, gain))
}

/// `f = −μ∇Θ − λẋ`
pub fn dynamic_law(gradient: Vec2, velocity: Vec2, mu: f64, lambda: f64) -> Vec2 {
    -(gradient * mu) - velocity * lambda
}

pub fn dynamic_control(state: &RobotState, nf: &NavFunction, mu: f64, lambda: f64) -> Result<Vec2> {
    Ok(dynamic_law(nf.gradient(state.position)?, state.velocity, mu, lambda))
}

/// `λ_c = 2√(2μm) Π‖P_d − P_i‖^{−1/k}` (empty product = 1).
pub fn critical_damping(mu: f64, mass: f64, pw: &PointWorld, k: u32) -> f64 {
    let log_prod: f64 = pw
        .obstacle_points
        .iter()
        .map(|p| math::ln((pw.destination - *p).norm_sq()))
        .sum();
    // ‖·‖^{-1/k} = exp(−ln‖·‖² / 2k)
    2.0 * math::sqrt(2.0 * mu * mass) * math::exp(-log_prod / (2.0 * k as f64))
}

/// Energy-triggered dissipation. `V = μ` falls in the stopping-distance branch.
pub fn dissipation(ds: &DampingState, energy: f64, mu: f64, mass: f64, pw: &PointWorld, k: u32) -> f64 {
    if energy < mu {
        critical_damping(mu, mass, pw, k)
    } else {
        mass * ds.last_discovery_speed / ds.d_min
    }
}

/// Distance covered by `m ẍ + λ ẋ = 0` starting at `speed` before it comes to rest.
pub fn stopping_distance(speed: f64, mass: f64, lambda: f64) -> f64 {
    mass * speed / lambda
}
