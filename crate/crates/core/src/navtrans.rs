//! A concrete navigation transformation from the free workspace interior
//! onto a point world.
//!
//! Each known obstacle is collapsed onto its centre by a radial
//! reparameterisation supported in an annulus around it; outside the annuli
//! the collapses are the identity, so they commute. The outer disk is then
//! blown up onto the whole plane with `x / (R0² − ‖x‖²)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{DiskObstacle, Mat2, Vec2, Workspace};
use crate::math;

/// Smooth transition `ζ(u) = g(u) / (g(u) + g(1 − u))` with `g(u) = exp(−1/u)`,
/// and its derivative. Flat (all derivatives zero) at both ends.
pub(crate) fn smooth_step(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0);
    }
    let v = 1.0 - u;
    // ζ = 1 / (1 + g(v)/g(u)) = 1 / (1 + exp(1/u − 1/v))
    let t = 1.0 / u - 1.0 / v;
    let zeta = if t > 0.0 {
        let e = math::exp(-t);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + math::exp(t))
    };
    let dzeta = zeta * (1.0 - zeta) * (1.0 / (u * u) + 1.0 / (v * v));
    (zeta, dzeta)
}

/// Annulus `inner_radius < ‖x − center‖ < outer_radius` in which obstacle
/// `obstacle_index` is squeezed onto its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseNeighborhood {
    pub obstacle_index: usize,
    pub center: Vec2,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl CollapseNeighborhood {
    pub fn new(obstacle_index: usize, center: Vec2, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0) || !(outer_radius > inner_radius) || !outer_radius.is_finite() {
            return Err(Error::NeighborhoodInfeasible { index: obstacle_index });
        }
        Ok(CollapseNeighborhood { obstacle_index, center, inner_radius, outer_radius })
    }

    /// Radial profile `s(r)` and `s'(r)` on the annulus.
    fn profile(&self, r: f64) -> (f64, f64) {
        let (rho, eps) = (self.inner_radius, self.outer_radius);
        let width = eps - rho;
        let (zeta, dzeta) = smooth_step((eps - r) / width);
        (r - rho * zeta, 1.0 + rho * dzeta / width)
    }

    /// The collapse map and its Jacobian. Identity outside the annulus.
    pub fn apply(&self, x: Vec2) -> Result<(Vec2, Mat2)> {
        let d = x - self.center;
        let r = d.norm();
        if r <= self.inner_radius {
            return Err(Error::InsideObstacle { index: self.obstacle_index });
        }
        if r >= self.outer_radius {
            return Ok((x, Mat2::IDENTITY));
        }
        let e = d / r;
        let (s, ds) = self.profile(r);
        let radial = Mat2::outer(e, e);
        let tangential = Mat2::IDENTITY + radial * -1.0;
        let jac = radial * ds + tangential * (s / r);
        Ok((self.center + e * s, jac))
    }

    fn disjoint_from(&self, other: &CollapseNeighborhood) -> bool {
        self.center.distance(other.center) >= self.outer_radius + other.outer_radius
    }
}

/// `h = x / (R0² − ‖x‖²)` and its Jacobian.
pub fn outer_blowup(outer_radius: f64, x: Vec2) -> Result<(Vec2, Mat2)> {
    let r = x.norm();
    if !(r < outer_radius) {
        return Err(Error::OutsideWorkspace);
    }
    // factored form keeps relative precision near the boundary
    let denom = (outer_radius - r) * (outer_radius + r);
    let jac = (Mat2::IDENTITY + Mat2::outer(x, x) * (2.0 / denom)) * (1.0 / denom);
    Ok((x / denom, jac))
}

/// Images of the obstacles and of the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct PointWorld {
    pub obstacle_points: Vec<Vec2>,
    pub destination: Vec2,
}

impl PointWorld {
    pub fn new(obstacle_points: Vec<Vec2>, destination: Vec2) -> Self {
        PointWorld { obstacle_points, destination }
    }

    /// Number of point obstacles `M`.
    pub fn count(&self) -> usize {
        self.obstacle_points.len()
    }

    /// Largest distance between any two of the points (obstacles and destination).
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Vec2> =
            self.obstacle_points.iter().copied().chain(core::iter::once(self.destination)).collect();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d = d.max(pts[i].distance(pts[j]));
            }
        }
        d
    }

    pub fn centroid(&self) -> Vec2 {
        let mut c = self.destination;
        for p in &self.obstacle_points {
            c += *p;
        }
        c / (self.count() + 1) as f64
    }
}

fn default_outer_radius(rho: f64, gap: f64) -> f64 {
    (rho + 0.5 * gap).min(2.0 * rho)
}

/// Default collapse neighborhoods for every obstacle of the workspace, known
/// or not: `ε = min(ρ + gap/2, 2ρ)` where `gap` is the clearance to the
/// nearest other obstacle, the outer boundary or the destination.
/// Pairwise these never overlap, so any subset can be used together.
pub fn plan_neighborhoods(workspace: &Workspace) -> Result<Vec<CollapseNeighborhood>> {
    let obstacles = workspace.obstacles();
    let mut plan = Vec::with_capacity(obstacles.len());
    for (i, o) in obstacles.iter().enumerate() {
        let mut gap = workspace.outer_radius() - o.center.norm() - o.radius;
        gap = gap.min(o.clearance(workspace.destination()));
        for (j, other) in obstacles.iter().enumerate() {
            if j != i {
                gap = gap.min(o.center.distance(other.center) - o.radius - other.radius);
            }
        }
        if !(gap > 0.0) {
            return Err(Error::NeighborhoodInfeasible { index: i });
        }
        plan.push(CollapseNeighborhood::new(i, o.center, o.radius, default_outer_radius(o.radius, gap))?);
    }
    Ok(plan)
}

/// The navigation transformation for the currently known obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct NavTransform {
    outer_radius: f64,
    destination: Vec2,
    neighborhoods: Vec<CollapseNeighborhood>,
    point_world: PointWorld,
}

impl NavTransform {
    /// Transform over the obstacles of `workspace` currently flagged known.
    pub fn new(workspace: &Workspace) -> Result<Self> {
        let plan = plan_neighborhoods(workspace)?;
        let known = plan
            .into_iter()
            .filter(|n| workspace.obstacles()[n.obstacle_index].known)
            .collect();
        Self::from_neighborhoods(workspace.outer_radius(), workspace.destination(), known)
    }

    pub fn from_neighborhoods(
        outer_radius: f64,
        destination: Vec2,
        neighborhoods: Vec<CollapseNeighborhood>,
    ) -> Result<Self> {
        let mut nt = NavTransform {
            outer_radius,
            destination,
            neighborhoods: Vec::with_capacity(neighborhoods.len()),
            point_world: PointWorld::new(Vec::new(), outer_blowup(outer_radius, destination)?.0),
        };
        for n in neighborhoods {
            nt.push_neighborhood(n)?;
        }
        Ok(nt)
    }

    fn check_neighborhood(&self, n: &CollapseNeighborhood) -> Result<()> {
        let infeasible = Error::NeighborhoodInfeasible { index: n.obstacle_index };
        if n.center.norm() + n.outer_radius >= self.outer_radius
            || n.center.distance(self.destination) <= n.outer_radius
            || self.neighborhoods.iter().any(|m| !m.disjoint_from(n) || m.obstacle_index == n.obstacle_index)
        {
            return Err(infeasible);
        }
        Ok(())
    }

    fn push_neighborhood(&mut self, n: CollapseNeighborhood) -> Result<()> {
        self.check_neighborhood(&n)?;
        let image = outer_blowup(self.outer_radius, n.center)?.0;
        self.neighborhoods.push(n);
        self.point_world.obstacle_points.push(image);
        Ok(())
    }

    /// New transform that additionally collapses `n`. Outside `n`'s annulus the
    /// result agrees exactly with `self`.
    pub fn with_neighborhood(&self, n: CollapseNeighborhood) -> Result<Self> {
        let mut next = self.clone();
        next.push_neighborhood(n)?;
        Ok(next)
    }

    /// New transform including a newly discovered obstacle, its annulus sized
    /// by the default rule against the existing annuli, the outer boundary
    /// and the destination.
    pub fn rebuild_with_obstacle(&self, obstacle_index: usize, obstacle: &DiskObstacle) -> Result<Self> {
        let c = obstacle.center;
        let rho = obstacle.radius;
        let mut gap = (self.outer_radius - c.norm() - rho).min(obstacle.clearance(self.destination));
        for m in &self.neighborhoods {
            gap = gap.min(c.distance(m.center) - rho - m.outer_radius);
        }
        if !(gap > 0.0) {
            return Err(Error::NeighborhoodInfeasible { index: obstacle_index });
        }
        let n = CollapseNeighborhood::new(obstacle_index, c, rho, default_outer_radius(rho, gap))?;
        self.with_neighborhood(n)
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn destination(&self) -> Vec2 {
        self.destination
    }

    pub fn neighborhoods(&self) -> &[CollapseNeighborhood] {
        &self.neighborhoods
    }

    pub fn point_world(&self) -> &PointWorld {
        &self.point_world
    }

    /// Φ(x) and its Jacobian: all collapses in order, then the outer blow-up.
    pub fn apply(&self, x: Vec2) -> Result<(Vec2, Mat2)> {
        self.apply_ordered(x, self.neighborhoods.iter())
    }

    pub(crate) fn apply_ordered<'a>(
        &self,
        x: Vec2,
        order: impl Iterator<Item = &'a CollapseNeighborhood>,
    ) -> Result<(Vec2, Mat2)> {
        if !(x.norm() < self.outer_radius) {
            return Err(Error::OutsideWorkspace);
        }
        let mut y = x;
        let mut jac = Mat2::IDENTITY;
        for n in order {
            let (next, j) = n.apply(y)?;
            y = next;
            jac = j.mul_mat(&jac);
        }
        let (h, jb) = outer_blowup(self.outer_radius, y)?;
        Ok((h, jb.mul_mat(&jac)))
    }

    pub fn map(&self, x: Vec2) -> Result<Vec2> {
        self.apply(x).map(|(h, _)| h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn fd_jacobian(f: impl Fn(Vec2) -> Vec2, x: Vec2, step: f64) -> Mat2 {
        let dx = (f(x + Vec2::new(step, 0.0)) - f(x - Vec2::new(step, 0.0))) / (2.0 * step);
        let dy = (f(x + Vec2::new(0.0, step)) - f(x - Vec2::new(0.0, step))) / (2.0 * step);
        Mat2::new(dx.x, dy.x, dx.y, dy.y)
    }

    fn rel_err(a: &Mat2, b: &Mat2) -> f64 {
        a.max_abs_diff(b) / a.frobenius().max(b.frobenius()).max(1e-300)
    }

    fn workspace() -> Workspace {
        Workspace::new(
            3.0,
            vec![
                DiskObstacle::new(Vec2::new(1.0, 0.5), 0.3, true),
                DiskObstacle::new(Vec2::new(-1.0, -0.8), 0.25, true),
                DiskObstacle::new(Vec2::new(0.0, 1.9), 0.2, true),
            ],
            Vec2::new(-2.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn smooth_step_endpoints() {
        assert_eq!(smooth_step(0.0), (0.0, 0.0));
        assert_eq!(smooth_step(1.0), (1.0, 0.0));
        let (z, _) = smooth_step(0.5);
        assert!((z - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let (z, dz) = smooth_step(u);
            let fd = (smooth_step(u + 1e-7).0 - smooth_step(u - 1e-7).0) / 2e-7;
            assert!((0.0..=1.0).contains(&z));
            assert!(dz >= 0.0);
            assert!((dz - fd).abs() < 1e-6 * dz.max(1.0), "u={u}: {dz} vs {fd}");
        }
    }

    #[test]
    fn collapse_is_identity_outside_annulus() {
        let n = CollapseNeighborhood::new(0, Vec2::new(1.0, 1.0), 0.2, 0.4).unwrap();
        let x = Vec2::new(1.5, 1.0);
        let (y, j) = n.apply(x).unwrap();
        assert_eq!(y, x);
        assert_eq!(j, Mat2::IDENTITY);
        assert_eq!(n.apply(Vec2::new(1.1, 1.0)), Err(Error::InsideObstacle { index: 0 }));
    }

    #[test]
    fn collapse_sends_inner_circle_to_center() {
        let c = Vec2::new(1.0, 1.0);
        let n = CollapseNeighborhood::new(0, c, 0.2, 0.4).unwrap();
        let (y, _) = n.apply(c + Vec2::new(0.2 + 1e-9, 0.0)).unwrap();
        assert!(y.distance(c) < 2e-9);
    }

    #[test]
    fn collapse_jacobian_matches_finite_differences() {
        let n = CollapseNeighborhood::new(3, Vec2::new(0.3, -0.2), 0.2, 0.4).unwrap();
        for k in 0..32 {
            let a = k as f64 * 0.37;
            for r in [0.22, 0.3, 0.38] {
                let x = n.center + Vec2::from_angle(a) * r;
                let (_, j) = n.apply(x).unwrap();
                let fd = fd_jacobian(|p| n.apply(p).unwrap().0, x, 1e-6);
                assert!(rel_err(&j, &fd) < 1e-6, "r={r} a={a}: {:?} vs {:?}", j, fd);
                assert!(j.det() > 0.0);
            }
        }
    }

    #[test]
    fn blowup_examples() {
        let (h, j) = outer_blowup(2.0, Vec2::ZERO).unwrap();
        assert_eq!(h, Vec2::ZERO);
        assert_eq!(j, Mat2::scalar(0.25));
        let (h, _) = outer_blowup(2.0, Vec2::new(1.0, 0.0)).unwrap();
        assert!((h.x - 1.0 / 3.0).abs() < 1e-16 && h.y == 0.0);
        assert_eq!(outer_blowup(2.0, Vec2::new(2.0, 0.0)).unwrap_err(), Error::OutsideWorkspace);
        let r0 = 2.0;
        let (h, _) = outer_blowup(r0, Vec2::new(r0 * (1.0 - 1e-9), 0.0)).unwrap();
        assert!(h.norm() > 1e8 * (1.0 / (2.0 * r0)));
    }

    #[test]
    fn blowup_grows_along_rays() {
        let ws = workspace();
        let nt = NavTransform::new(&ws).unwrap();
        for a in 0..16 {
            let u = Vec2::from_angle(a as f64 * core::f64::consts::TAU / 16.0);
            let mut last = 0.0;
            for k in 3..=9 {
                let x = u * (3.0 * (1.0 - libm::pow(10.0, -(k as f64))));
                if let Ok(h) = nt.map(x) {
                    assert!(h.norm() > last);
                    last = h.norm();
                }
            }
        }
    }

    #[test]
    fn transform_consistency() {
        let ws = workspace();
        let nt = NavTransform::new(&ws).unwrap();
        assert_eq!(nt.point_world().count(), 3);
        assert_eq!(nt.map(ws.destination()).unwrap(), nt.point_world().destination);
        for (n, p) in nt.neighborhoods().iter().zip(&nt.point_world().obstacle_points) {
            assert_eq!(outer_blowup(3.0, n.center).unwrap().0, *p);
        }
        // far from every annulus the transform is just the blow-up
        let x = Vec2::new(0.0, -2.0);
        assert_eq!(nt.map(x).unwrap(), outer_blowup(3.0, x).unwrap().0);
    }

    #[test]
    fn rebuild_is_local() {
        let mut ws = workspace();
        let extra = DiskObstacle::new(Vec2::new(1.2, -1.5), 0.2, false);
        let mut obstacles = ws.obstacles().to_vec();
        obstacles.push(extra);
        ws = Workspace::new(3.0, obstacles, ws.destination()).unwrap();
        let old = NavTransform::new(&ws).unwrap();
        let new = old.rebuild_with_obstacle(3, &extra).unwrap();
        assert_eq!(new.point_world().count(), old.point_world().count() + 1);
        assert_eq!(*new.point_world().obstacle_points.last().unwrap(), outer_blowup(3.0, extra.center).unwrap().0);
        let eps = new.neighborhoods().last().unwrap().outer_radius;
        for i in 0..60 {
            for j in 0..60 {
                let x = Vec2::new(-2.9 + 5.8 * i as f64 / 59.0, -2.9 + 5.8 * j as f64 / 59.0);
                if x.distance(extra.center) < eps {
                    continue;
                }
                if let Ok(a) = old.apply(x) {
                    assert_eq!(new.apply(x).unwrap(), a);
                }
            }
        }
    }

    #[test]
    fn rebuild_rejects_overlap() {
        let ws = workspace();
        let nt = NavTransform::new(&ws).unwrap();
        let clash = DiskObstacle::new(Vec2::new(1.0, 0.85), 0.04, false);
        assert!(nt.rebuild_with_obstacle(9, &clash).is_err());
    }

    fn grid(ws: &Workspace, n: usize) -> Vec<Vec2> {
        let r0 = ws.outer_radius();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = Vec2::new(-r0 + 2.0 * r0 * (i as f64 + 0.5) / n as f64, -r0 + 2.0 * r0 * (j as f64 + 0.5) / n as f64);
                if ws.clearance(x) > 0.0 {
                    out.push(x);
                }
            }
        }
        out
    }

    #[test]
    fn jacobian_positive_and_map_injective_on_grid() {
        let ws = workspace();
        let nt = NavTransform::new(&ws).unwrap();
        let pts = grid(&ws, 200);
        let mut images: Vec<Vec2> = pts
            .iter()
            .map(|&x| {
                let (h, j) = nt.apply(x).unwrap();
                assert!(j.det() > 0.0, "det at {:?}", x);
                h
            })
            .collect();
        images.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                if images[j].x - images[i].x > 1e-9 {
                    break;
                }
                assert!(images[i].distance(images[j]) > 1e-9);
            }
        }
    }

    #[test]
    fn collapses_commute() {
        let ws = workspace();
        let nt = NavTransform::new(&ws).unwrap();
        let mut rev: Vec<_> = nt.neighborhoods().to_vec();
        rev.reverse();
        for x in grid(&ws, 40) {
            let (a, ja) = nt.apply(x).unwrap();
            let (b, jb) = nt.apply_ordered(x, rev.iter()).unwrap();
            assert!(a.distance(b) <= 1e-12 * a.norm().max(1.0));
            assert!(ja.max_abs_diff(&jb) <= 1e-12 * ja.frobenius());
        }
    }

    proptest! {
        #[test]
        fn transform_jacobian_matches_finite_differences(t in 0.0f64..1.0, a in 0.0f64..core::f64::consts::TAU) {
            let ws = workspace();
            let nt = NavTransform::new(&ws).unwrap();
            let x = Vec2::from_angle(a) * (2.9 * libm::sqrt(t));
            prop_assume!(ws.clearance(x) > 1e-3);
            let (_, j) = nt.apply(x).unwrap();
            let step = 1e-6;
            let fd = fd_jacobian(|p| nt.map(p).unwrap(), x, step);
            prop_assert!(rel_err(&j, &fd) < 1e-6, "{:?} vs {:?}", j, fd);
        }
    }
}
