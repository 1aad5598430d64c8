//! Harmonic point-world potential, the logistic squashing and the resulting
//! workspace navigation function, with analytic derivatives.
//!
//! On the point world
//!
//! ```text
//! φ_k(h) = ln‖h − P_d‖² − (1/k) Σ ln‖h − P_i‖²
//! ```
//!
//! and the navigation function is `σ(φ_k(Φ(x)))`. The squashed value is
//! evaluated through the equivalent rational form
//! `‖h_d‖² / (‖h_d‖² + Π‖h_i‖^{2/k})`, which stays finite at the poles.

use crate::error::{Error, Result};
use crate::geometry::{SymMat2, Vec2, Workspace};
use crate::math;
use crate::navtrans::{NavTransform, PointWorld};
use crate::sim::RobotState;

/// Point-world evaluations closer than this to a pole are rejected.
pub const POLE_GUARD: f64 = 1e-12;

/// Logistic function, overflow-free for any input including ±∞.
pub fn sigma(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + math::exp(-t))
    } else {
        let e = math::exp(t);
        e / (1.0 + e)
    }
}

fn check_obstacle_poles(h: Vec2, pw: &PointWorld) -> Result<()> {
    for (i, p) in pw.obstacle_points.iter().enumerate() {
        if h.distance(*p) < POLE_GUARD {
            return Err(Error::NearPole { index: Some(i) });
        }
    }
    Ok(())
}

fn check_all_poles(h: Vec2, pw: &PointWorld) -> Result<()> {
    if h.distance(pw.destination) < POLE_GUARD {
        return Err(Error::NearPole { index: None });
    }
    check_obstacle_poles(h, pw)
}

/// `φ_k(h)` on the extended real line: `−∞` at the destination image, `+∞`
/// at an obstacle image.
pub fn phi_k(h: Vec2, pw: &PointWorld, k: u32) -> f64 {
    let mut obstacle_sum = 0.0;
    for p in &pw.obstacle_points {
        let d2 = (h - *p).norm_sq();
        if d2 == 0.0 {
            return f64::INFINITY;
        }
        obstacle_sum += math::ln(d2);
    }
    math::ln((h - pw.destination).norm_sq()) - obstacle_sum / k as f64
}

/// `(‖h − P_d‖², Π‖h − P_i‖^{2/k})`; the product is accumulated in log space.
fn rational_parts(h: Vec2, pw: &PointWorld, k: u32) -> (f64, f64) {
    let a = (h - pw.destination).norm_sq();
    let mut log_b = 0.0;
    for p in &pw.obstacle_points {
        log_b += math::ln((h - *p).norm_sq());
    }
    (a, math::exp(log_b / k as f64))
}

/// Squashed potential `σ(φ_k(h))` in `[0, 1]`.
pub fn varphi(h: Vec2, pw: &PointWorld, k: u32) -> f64 {
    let (a, b) = rational_parts(h, pw, k);
    if a == 0.0 {
        return 0.0;
    }
    a / (a + b)
}

/// Sum of `h_i / ‖h_i‖²` over the obstacle images.
fn obstacle_field(h: Vec2, pw: &PointWorld) -> Vec2 {
    let mut s = Vec2::ZERO;
    for p in &pw.obstacle_points {
        let v = h - *p;
        s += v / v.norm_sq();
    }
    s
}

/// `∇φ_k(h) = 2 h_d/‖h_d‖² − (2/k) Σ h_i/‖h_i‖²`.
pub fn grad_phi_k(h: Vec2, pw: &PointWorld, k: u32) -> Result<Vec2> {
    check_all_poles(h, pw)?;
    let hd = h - pw.destination;
    Ok(hd * (2.0 / hd.norm_sq()) - obstacle_field(h, pw) * (2.0 / k as f64))
}

/// Hessian of `ln‖v‖²` at offset `v`: `2(‖v‖² I − 2 v vᵀ)/‖v‖⁴`.
/// The diagonal is written so that the trace is exactly zero.
fn log_hessian(v: Vec2) -> SymMat2 {
    let n2 = v.norm_sq();
    let s = 2.0 / (n2 * n2);
    let diag = (v.y * v.y - v.x * v.x) * s;
    SymMat2::new(diag, -2.0 * v.x * v.y * s, -diag)
}

/// Analytic Hessian of `φ_k`; trace-free by construction.
pub fn hess_phi_k(h: Vec2, pw: &PointWorld, k: u32) -> Result<SymMat2> {
    check_all_poles(h, pw)?;
    let mut obstacles = SymMat2::ZERO;
    for p in &pw.obstacle_points {
        obstacles += log_hessian(h - *p);
    }
    Ok(log_hessian(h - pw.destination) + obstacles * (-1.0 / k as f64))
}

/// Point-world gradient of the squashed potential, `σ'(φ_k) ∇φ_k`, written so
/// that it is finite (and zero) at the destination image.
pub fn grad_varphi_point(h: Vec2, pw: &PointWorld, k: u32) -> Result<Vec2> {
    check_obstacle_poles(h, pw)?;
    let hd = h - pw.destination;
    let (a, b) = rational_parts(h, pw, k);
    let s = a + b;
    let dsigma = a * b / (s * s);
    Ok(hd * (2.0 * b / (s * s)) - obstacle_field(h, pw) * (dsigma * 2.0 / k as f64))
}

/// Hessian of the squashed potential at the destination image,
/// `2 / Π‖P_d − P_i‖^{2/k} · I` (empty product = 1).
pub fn hessian_at_destination(pw: &PointWorld, k: u32) -> SymMat2 {
    let log_prod: f64 = pw
        .obstacle_points
        .iter()
        .map(|p| math::ln((pw.destination - *p).norm_sq()))
        .sum();
    SymMat2::scalar(2.0 * math::exp(-log_prod / k as f64))
}

/// `Θ = σ ∘ φ_k ∘ Φ` for the obstacles the transform knows about.
#[derive(Debug, Clone, PartialEq)]
pub struct NavFunction {
    transform: NavTransform,
    k: u32,
}

impl NavFunction {
    /// Uses `k = M + 1`.
    pub fn new(transform: NavTransform) -> Self {
        let k = transform.point_world().count() as u32 + 1;
        NavFunction { transform, k }
    }

    pub fn with_k(transform: NavTransform, k: u32) -> Result<Self> {
        if (k as usize) <= transform.point_world().count() {
            return Err(Error::InvalidParameter("k must exceed the number of obstacles"));
        }
        Ok(NavFunction { transform, k })
    }

    /// Navigation function over the obstacles currently flagged known.
    pub fn for_workspace(workspace: &Workspace) -> Result<Self> {
        Ok(Self::new(NavTransform::new(workspace)?))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn transform(&self) -> &NavTransform {
        &self.transform
    }

    pub fn point_world(&self) -> &PointWorld {
        self.transform.point_world()
    }

    pub fn value(&self, x: Vec2) -> Result<f64> {
        let h = self.transform.map(x)?;
        Ok(varphi(h, self.point_world(), self.k))
    }

    /// Workspace gradient `J_Φᵀ ∇_h σ(φ_k)`.
    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        self.eval(x).map(|(_, g)| g)
    }

    /// Value and gradient sharing one evaluation of Φ.
    pub fn eval(&self, x: Vec2) -> Result<(f64, Vec2)> {
        let (h, jac) = self.transform.apply(x)?;
        let pw = self.point_world();
        let g = grad_varphi_point(h, pw, self.k)?;
        Ok((varphi(h, pw, self.k), jac.tr_mul_vec(g)))
    }
}

/// Total energy `μΘ + ½ m ẋᵀẋ`.
pub fn total_energy(state: &RobotState, nf: &NavFunction, mu: f64, mass: f64) -> Result<f64> {
    Ok(mu * nf.value(state.position)? + 0.5 * mass * state.velocity.norm_sq())
}
