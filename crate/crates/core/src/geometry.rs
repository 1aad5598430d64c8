//! Planar primitives, the disk workspace and the symmetric sensing sector.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta` (radians) from the x axis.
    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(math::cos(theta), math::sin(theta))
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3-D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = (math::sin(angle), math::cos(angle));
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unit vector in the same direction, `None` for (numerically) zero vectors.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn angle(self) -> f64 {
        math::atan2(self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// General 2x2 matrix, row major. Used for Jacobians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { m: [[1.0, 0.0], [0.0, 1.0]] };

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { m: [[a11, a12], [a21, a22]] }
    }

    pub fn scalar(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }

    /// `u vᵀ`
    pub fn outer(u: Vec2, v: Vec2) -> Self {
        Mat2::new(u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    /// `selfᵀ v`, the pull-back of a gradient through a Jacobian.
    pub fn tr_mul_vec(&self, v: Vec2) -> Vec2 {
        self.transpose().mul_vec(v)
    }

    pub fn mul_mat(&self, o: &Mat2) -> Mat2 {
        let a = &self.m;
        let b = &o.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.m.iter().flatten().map(|v| v * v).sum())
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - o.m[i][j]).abs());
            }
        }
        d
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.m[0][0] * s, self.m[0][1] * s, self.m[1][0] * s, self.m[1][1] * s)
    }
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat2 { xx, xy, yy }
    }

    pub fn scalar(s: f64) -> Self {
        SymMat2::new(s, 0.0, s)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let r = math::hypot(0.5 * (self.xx - self.yy), self.xy);
        (mean - r, mean + r)
    }

    /// `vᵀ H v`
    pub fn quad_form(&self, v: Vec2) -> f64 {
        self.xx * v.x * v.x + 2.0 * self.xy * v.x * v.y + self.yy * v.y * v.y
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Solves `H s = b`; `None` when the matrix is singular to working precision.
    pub fn solve(&self, b: Vec2) -> Option<Vec2> {
        let det = self.det();
        let scale = self.frobenius();
        if !(det.abs() > 1e-300) || det.abs() <= 1e-15 * scale * scale {
            return None;
        }
        Some(Vec2::new(
            (self.yy * b.x - self.xy * b.y) / det,
            (self.xx * b.y - self.xy * b.x) / det,
        ))
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(self.xx, self.xy, self.xy, self.yy)
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl AddAssign for SymMat2 {
    fn add_assign(&mut self, o: SymMat2) {
        self.xx += o.xx;
        self.xy += o.xy;
        self.yy += o.yy;
    }
}

impl Mul<f64> for SymMat2 {
    type Output = SymMat2;
    fn mul(self, s: f64) -> SymMat2 {
        SymMat2::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskObstacle {
    pub center: Vec2,
    pub radius: f64,
    pub known: bool,
}

impl DiskObstacle {
    pub fn new(center: Vec2, radius: f64, known: bool) -> Self {
        DiskObstacle { center, radius, known }
    }

    /// Signed distance from `p` to the disk boundary (negative inside).
    pub fn clearance(&self, p: Vec2) -> f64 {
        p.distance(self.center) - self.radius
    }
}

/// Outer disk of radius `outer_radius` centred at the origin, with disk
/// obstacles and a destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    outer_radius: f64,
    obstacles: Vec<DiskObstacle>,
    destination: Vec2,
    rho_min: f64,
}

impl Workspace {
    /// Validates the layout. `rho_min` defaults to the smallest obstacle
    /// radius, or the outer radius when there are no obstacles.
    pub fn new(outer_radius: f64, obstacles: Vec<DiskObstacle>, destination: Vec2) -> Result<Self> {
        if !(outer_radius > 0.0) || !outer_radius.is_finite() {
            return Err(Error::InvalidParameter("outer radius must be positive and finite"));
        }
        for (i, o) in obstacles.iter().enumerate() {
            if !(o.radius > 0.0) || !o.radius.is_finite() || !o.center.is_finite() {
                return Err(Error::InvalidParameter("obstacle radius must be positive and finite"));
            }
            if o.center.norm() + o.radius >= outer_radius {
                return Err(Error::ObstacleOutsideBoundary { index: i });
            }
        }
        for i in 0..obstacles.len() {
            for j in (i + 1)..obstacles.len() {
                let (a, b) = (&obstacles[i], &obstacles[j]);
                if a.center.distance(b.center) <= a.radius + b.radius {
                    return Err(Error::ObstacleOverlap { a: i, b: j });
                }
            }
        }
        if !destination.is_finite()
            || destination.norm() >= outer_radius
            || obstacles.iter().any(|o| o.clearance(destination) <= 0.0)
        {
            return Err(Error::DestinationNotFree);
        }
        let rho_min = obstacles
            .iter()
            .map(|o| o.radius)
            .fold(f64::INFINITY, f64::min)
            .min(outer_radius);
        Ok(Workspace { outer_radius, obstacles, destination, rho_min })
    }

    pub fn with_rho_min(mut self, rho_min: f64) -> Result<Self> {
        if !(rho_min > 0.0) || !rho_min.is_finite() {
            return Err(Error::InvalidParameter("rho_min must be positive"));
        }
        self.rho_min = rho_min;
        Ok(self)
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn obstacles(&self) -> &[DiskObstacle] {
        &self.obstacles
    }

    pub fn destination(&self) -> Vec2 {
        self.destination
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn mark_known(&mut self, index: usize) {
        self.obstacles[index].known = true;
    }

    pub fn known_count(&self) -> usize {
        self.obstacles.iter().filter(|o| o.known).count()
    }

    /// Signed distance to the nearest boundary (obstacles or outer circle),
    /// negative inside an obstacle or outside the outer disk. Every obstacle
    /// counts, known or not.
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.clearance(p))
            .fold(self.outer_radius - p.norm(), f64::min)
    }
}

/// Closed symmetric sector with pole at the robot and axis along its velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingSector {
    range: f64,
    aperture: f64,
    pole: Vec2,
    axis: Vec2,
}

impl SensingSector {
    pub fn new(range: f64, aperture: f64, pole: Vec2, axis: Vec2) -> Result<Self> {
        if !(range >= 0.0) || !range.is_finite() {
            return Err(Error::InvalidParameter("sensing range must be nonnegative"));
        }
        if !(aperture > 0.0 && aperture <= TAU) {
            return Err(Error::InvalidParameter("aperture must lie in (0, 2*pi]"));
        }
        let axis = axis
            .normalized()
            .ok_or(Error::InvalidParameter("sector axis must be nonzero"))?;
        Ok(SensingSector { range, aperture, pole, axis })
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn pole(&self) -> Vec2 {
        self.pole
    }

    pub fn axis(&self) -> Vec2 {
        self.axis
    }

    /// Boundary-inclusive membership test.
    pub fn contains_point(&self, p: Vec2) -> bool {
        let d = p - self.pole;
        let r = d.norm();
        if r == 0.0 {
            return true;
        }
        if r > self.range * (1.0 + 1e-12) {
            return false;
        }
        // |angle| <= aperture/2  <=>  cos(angle) >= cos(aperture/2) on [0, pi].
        d.dot(self.axis) >= r * math::cos(0.5 * self.aperture) - 1e-15 * r
    }

    fn edge_endpoints(&self) -> (Vec2, Vec2) {
        let half = 0.5 * self.aperture;
        (
            self.pole + self.axis.rotate(half) * self.range,
            self.pole + self.axis.rotate(-half) * self.range,
        )
    }

    /// Euclidean distance from `p` to the closed sector (zero inside).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        if self.contains_point(p) {
            return 0.0;
        }
        let (e1, e2) = self.edge_endpoints();
        let mut best = segment_distance(p, self.pole, e1).min(segment_distance(p, self.pole, e2));
        let d = p - self.pole;
        let r = d.norm();
        let angle = math::atan2(self.axis.cross(d), self.axis.dot(d));
        if angle.abs() <= 0.5 * self.aperture {
            best = best.min((r - self.range).abs());
        }
        best
    }

    /// True iff the closed disk intersects the closed sector.
    pub fn detects_disk(&self, disk: &DiskObstacle) -> bool {
        self.distance_to(disk.center) <= disk.radius
    }
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Closest approach to an obstacle that can go undetected by a sector of
/// the given range and aperture, for obstacles whose boundary curvature
/// radius is at least `rho_min`.
pub fn min_detection_distance(range: f64, aperture: f64, rho_min: f64) -> Result<f64> {
    if !(range > 0.0) || !(aperture > 0.0) || !(rho_min > 0.0) {
        return Err(Error::InvalidParameter("range, aperture and rho_min must be positive"));
    }
    if aperture > TAU {
        return Err(Error::InvalidParameter("aperture must not exceed 2*pi"));
    }
    if aperture < PI {
        let half = 0.5 * aperture;
        Ok((range * math::sin(half)).min(rho_min / math::cos(half)))
    } else {
        Ok(range)
    }
}
