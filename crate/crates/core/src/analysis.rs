//! Numerical checks on the point-world potential: critical points and their
//! classification, the degeneracy scalar, a search for degenerate
//! arrangements, attractivity at infinity and saddle basin statistics.
//!
//! Critical-point search is grid-seeded Newton and therefore heuristic: it
//! can miss points, it never invents them.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{SymMat2, Vec2};
use crate::math;
use crate::navtrans::PointWorld;
use crate::potential::{grad_phi_k, hess_phi_k, phi_k};
use crate::sim::{simulate_kinematic, Outcome, Scenario};

pub const NEWTON_MAX_ITER: usize = 100;
pub const NEWTON_TOL: f64 = 1e-12;
/// Refined points must at least reach this gradient norm.
pub const ACCEPT_TOL: f64 = 1e-10;
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Newton iterates escaping this many search-box diagonals are dropped; the
/// gradient decays like `1/‖h‖` there and would pass the tolerance spuriously.
pub const FAR_FACTOR: f64 = 1e4;
/// Relative threshold used by [`classify`].
pub const CLASSIFY_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Saddle,
    Degenerate,
    DestinationMinimum,
    /// Between the saddle and degenerate thresholds; needs a human look.
    Unclassified,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Saddle => "saddle",
            Classification::Degenerate => "degenerate",
            Classification::DestinationMinimum => "destination_minimum",
            Classification::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    /// Location in point-world coordinates.
    pub location: Vec2,
    pub gradient_norm: f64,
    pub hessian: SymMat2,
    /// Ascending.
    pub eigenvalues: (f64, f64),
    pub classification: Classification,
}

/// Curvature scale of `φ_k` at `h`: `2/‖h_d‖² + (2/k) Σ 1/‖h_i‖²`.
pub fn curvature_scale(h: Vec2, pw: &PointWorld, k: u32) -> f64 {
    let mut s = 0.0;
    for p in &pw.obstacle_points {
        s += 1.0 / (h - *p).norm_sq();
    }
    2.0 / (h - pw.destination).norm_sq() + 2.0 * s / k as f64
}

/// Classifies a critical point from its Hessian relative to `scale`.
pub fn classify_hessian(hessian: &SymMat2, scale: f64) -> Classification {
    let (lo, hi) = hessian.eigenvalues();
    let thr = CLASSIFY_REL * scale;
    if hessian.frobenius() < thr {
        Classification::Degenerate
    } else if lo < -thr && hi > thr {
        Classification::Saddle
    } else if lo > thr {
        // cannot occur for a harmonic function; kept for completeness
        Classification::DestinationMinimum
    } else {
        Classification::Unclassified
    }
}

pub fn classify(cp: &CriticalPoint, pw: &PointWorld, k: u32) -> Classification {
    classify_hessian(&cp.hessian, curvature_scale(cp.location, pw, k))
}

/// Damped Newton on `∇φ_k` from `seed`. Returns the refined point or `None`
/// when the iteration fails to converge.
pub fn refine_critical_point(seed: Vec2, pw: &PointWorld, k: u32) -> Option<Vec2> {
    let mut h = seed;
    let mut g = grad_phi_k(h, pw, k).ok()?;
    for _ in 0..NEWTON_MAX_ITER {
        if g.norm() < NEWTON_TOL {
            break;
        }
        let hess = hess_phi_k(h, pw, k).ok()?;
        let step = hess.solve(-g)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = h + step * t;
            if let Ok(gc) = grad_phi_k(cand, pw, k) {
                if gc.norm() < g.norm() {
                    h = cand;
                    g = gc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (lo, hi) = search_box(pw);
    let far = (hi - lo).norm() * FAR_FACTOR;
    (g.norm() < ACCEPT_TOL && h.distance((lo + hi) * 0.5) < far).then_some(h)
}

fn critical_point_at(h: Vec2, pw: &PointWorld, k: u32) -> Result<CriticalPoint> {
    let g = grad_phi_k(h, pw, k)?;
    let hessian = hess_phi_k(h, pw, k)?;
    let eigenvalues = hessian.eigenvalues();
    let classification = classify_hessian(&hessian, curvature_scale(h, pw, k));
    Ok(CriticalPoint { location: h, gradient_norm: g.norm(), hessian, eigenvalues, classification })
}

/// Bounding box of all point-world points, inflated 2× about its centre.
/// A zero-size box is widened to unit size.
pub fn search_box(pw: &PointWorld) -> (Vec2, Vec2) {
    let mut lo = pw.destination;
    let mut hi = pw.destination;
    for p in &pw.obstacle_points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let c = (lo + hi) * 0.5;
    let half = (hi - lo) * 0.5;
    let w = half.x.max(half.y).max(0.5) * 2.0;
    (c - Vec2::new(w, w), c + Vec2::new(w, w))
}

/// Critical points of `φ_k` found by Newton from a `grid_n × grid_n` seed
/// grid, deduplicated and sorted by location.
pub fn find_critical_points(pw: &PointWorld, k: u32, grid_n: usize) -> Result<Vec<CriticalPoint>> {
    if grid_n < 16 {
        return Err(Error::InvalidParameter("grid_n must be at least 16"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    let (lo, hi) = search_box(pw);
    let mut found: Vec<Vec2> = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let seed = Vec2::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / grid_n as f64,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / grid_n as f64,
            );
            if let Some(h) = refine_critical_point(seed, pw, k) {
                if found.iter().all(|q| q.distance(h) >= DEDUP_RADIUS) {
                    found.push(h);
                }
            }
        }
    }
    found.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    found.into_iter().map(|h| critical_point_at(h, pw, k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub test_point: Vec2,
    pub lambda_scalar: f64,
    /// `c_id = ĥ_d · ĥ_i`
    pub cosines: Vec<f64>,
    /// `s_id = sin θ_id`, with `θ_id` the signed angle from `ĥ_d` to `ĥ_i`
    pub sines: Vec<f64>,
    pub angles: Vec<f64>,
    pub hessian_frobenius: f64,
}

/// `λ = k/‖h_d‖² − Σ c_id²/‖h_i‖² + Σ s_id²/‖h_i‖²` together with the angle
/// data it is built from. Satisfies `ĥ_dᵀ H ĥ_d = −(2/k) λ`.
pub fn degeneracy_scalar(h: Vec2, pw: &PointWorld, k: u32) -> Result<DegeneracyReport> {
    let hessian = hess_phi_k(h, pw, k)?;
    let hd = h - pw.destination;
    let ed = hd.normalized().ok_or(Error::NearPole { index: None })?;
    let mut lambda = k as f64 / hd.norm_sq();
    let m = pw.count();
    let (mut cosines, mut sines, mut angles) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    for (i, p) in pw.obstacle_points.iter().enumerate() {
        let hi = h - *p;
        let ei = hi.normalized().ok_or(Error::NearPole { index: Some(i) })?;
        let c = ed.dot(ei);
        let s = ed.cross(ei);
        lambda += (s * s - c * c) / hi.norm_sq();
        cosines.push(c);
        sines.push(s);
        angles.push(math::atan2(s, c));
    }
    Ok(DegeneracyReport {
        test_point: h,
        lambda_scalar: lambda,
        cosines,
        sines,
        angles,
        hessian_frobenius: hessian.frobenius(),
    })
}

/// Derivative-free simplex minimiser. Returns the best point and value.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_evals: usize, f_target: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[0] <= f_target {
            break;
        }
        let spread = simplex.iter().skip(1).map(|v| dist(v, &simplex[0])).fold(0.0, f64::max);
        if spread < 1e-15 {
            break;
        }
        let mut centroid = alloc::vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect() };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&contracted);
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best])
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// A member of the axisymmetric family around the test point `h = 0` with
/// `‖h_d‖ = 1`: obstacle 1 along `ĥ_d`, pairs at `±pair_angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateArrangement {
    pub point_world: PointWorld,
    pub point: Vec2,
    pub report: DegeneracyReport,
    pub gradient_norm: f64,
    /// `|λ| ‖h_d‖²`, dimensionless.
    pub lambda_residual: f64,
    pub pair_angle: f64,
    /// `1/‖h_d‖² − 1/(k‖h_1‖²)`
    pub distance_ratio_residual: f64,
    /// Closed-form radial projection `(2/k)(2√k − Σ 1/(√2‖h_i‖))` minus the
    /// projection `ĥ_d · ∇φ_k` actually evaluated.
    pub closed_form_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegenerateOutcome {
    Found(DegenerateArrangement),
    NotFound { best: DegenerateArrangement, best_residual: f64 },
}

impl DegenerateOutcome {
    pub fn arrangement(&self) -> &DegenerateArrangement {
        match self {
            DegenerateOutcome::Found(a) => a,
            DegenerateOutcome::NotFound { best, .. } => best,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateSearchOptions {
    /// Let the pair half-angle move away from its initial value.
    pub free_pair_angle: bool,
    pub initial_pair_angle: f64,
    pub restarts: usize,
    pub evals_per_restart: usize,
}

impl Default for DegenerateSearchOptions {
    fn default() -> Self {
        DegenerateSearchOptions {
            free_pair_angle: true,
            initial_pair_angle: 0.75 * PI,
            restarts: 20,
            evals_per_restart: 4000,
        }
    }
}

/// Success threshold on both the gradient norm and the scaled λ.
pub const DEGENERATE_TOL: f64 = 1e-8;

fn family_world(pair_angle: f64, b: f64, radii: &[f64]) -> PointWorld {
    let mut pts = Vec::with_capacity(1 + 2 * radii.len());
    pts.push(Vec2::new(-b, 0.0));
    for &r in radii {
        pts.push(-Vec2::from_angle(pair_angle) * r);
    }
    for &r in radii {
        pts.push(-Vec2::from_angle(-pair_angle) * r);
    }
    PointWorld::new(pts, Vec2::new(-1.0, 0.0))
}

fn decode(p: &[f64], opts: &DegenerateSearchOptions) -> (f64, f64, Vec<f64>) {
    let (angle, rest) = if opts.free_pair_angle { (p[0], &p[1..]) } else { (opts.initial_pair_angle, p) };
    (angle, math::exp(rest[0]), rest[1..].iter().map(|&x| math::exp(x)).collect())
}

fn arrangement(pw: PointWorld, pair_angle: f64, k: u32) -> Result<DegenerateArrangement> {
    let h = Vec2::ZERO;
    let report = degeneracy_scalar(h, &pw, k)?;
    let g = grad_phi_k(h, &pw, k)?;
    let hd = h - pw.destination;
    let h1 = h - pw.obstacle_points[0];
    let kf = k as f64;
    let tail: f64 = pw.obstacle_points[1..].iter().map(|p| FRAC_1_SQRT_2 / (h - *p).norm()).sum();
    let closed_form = (2.0 / kf) * (2.0 * math::sqrt(kf) - tail);
    let projection = hd.normalized().map(|e| e.dot(g)).unwrap_or(f64::NAN);
    Ok(DegenerateArrangement {
        lambda_residual: report.lambda_scalar.abs() * hd.norm_sq(),
        gradient_norm: g.norm(),
        distance_ratio_residual: 1.0 / hd.norm_sq() - 1.0 / (kf * h1.norm_sq()),
        closed_form_residual: closed_form - projection,
        point_world: pw,
        point: h,
        report,
        pair_angle,
    })
}

/// Searches the axisymmetric family with `mu_count` obstacle pairs
/// (`M = 2·mu_count + 1`) for a point where both `∇φ_k` and `λ` vanish.
pub fn degenerate_search(k: u32, mu_count: usize, opts: &DegenerateSearchOptions) -> Result<DegenerateOutcome> {
    if mu_count == 0 {
        return Err(Error::InvalidParameter("at least one obstacle pair is required"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    let objective = |p: &[f64]| -> f64 {
        let (angle, b, radii) = decode(p, opts);
        let pw = family_world(angle, b, &radii);
        // keep obstacle images apart from each other and from the destination
        let mut all = pw.obstacle_points.clone();
        all.push(pw.destination);
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if all[i].distance(all[j]) < 1e-6 {
                    return 1e30;
                }
            }
        }
        match (grad_phi_k(Vec2::ZERO, &pw, k), degeneracy_scalar(Vec2::ZERO, &pw, k)) {
            (Ok(g), Ok(r)) => g.norm_sq() + r.lambda_scalar * r.lambda_scalar,
            _ => 1e30,
        }
    };
    let mut x: Vec<f64> = Vec::new();
    if opts.free_pair_angle {
        x.push(opts.initial_pair_angle);
    }
    x.push(math::ln(1.0 / math::sqrt(k as f64)));
    x.extend(core::iter::repeat(0.0).take(mu_count));
    let mut best_val = objective(&x);
    for restart in 0..opts.restarts.max(1) {
        let step = 0.5 / (1.0 + restart as f64);
        let (cand, val) = nelder_mead(objective, &x, step, opts.evals_per_restart, 1e-34);
        if val <= best_val {
            x = cand;
            best_val = val;
        }
        if best_val < 1e-34 {
            break;
        }
    }
    let (angle, b, radii) = decode(&x, opts);
    let found = arrangement(family_world(angle, b, &radii), angle, k)?;
    if found.gradient_norm < DEGENERATE_TOL && found.lambda_residual < DEGENERATE_TOL {
        Ok(DegenerateOutcome::Found(found))
    } else {
        let best_residual = found.gradient_norm.max(found.lambda_residual);
        Ok(DegenerateOutcome::NotFound { best: found, best_residual })
    }
}

/// Ray origin and base radius used by the attractivity probes.
fn ray_setup(pw: &PointWorld) -> (Vec2, f64) {
    let d = pw.diameter();
    (pw.centroid(), 10.0 * if d > 0.0 { d } else { 1.0 })
}

pub const ATTRACTIVITY_RAYS: usize = 16;
pub const ATTRACTIVITY_SHELLS: usize = 11;

/// True iff `φ_k` strictly increases along 16 rays at radii `R·2^j`,
/// `j = 0..=10`, with `R` ten times the point-world diameter.
pub fn attractivity_check(pw: &PointWorld, k: u32) -> bool {
    let (c, r0) = ray_setup(pw);
    (0..ATTRACTIVITY_RAYS).all(|ray| {
        let dir = Vec2::from_angle(TAU * ray as f64 / ATTRACTIVITY_RAYS as f64);
        let mut prev = f64::NEG_INFINITY;
        (0..ATTRACTIVITY_SHELLS).all(|j| {
            let v = phi_k(c + dir * (r0 * (1u64 << j) as f64), pw, k);
            let up = v > prev;
            prev = v;
            up
        })
    })
}

/// Far-field slope of `k·φ_k` against `ln‖h‖`, averaged over the rays.
/// Tends to `2(k − M)`.
pub fn growth_exponent(pw: &PointWorld, k: u32) -> f64 {
    let (c, r0) = ray_setup(pw);
    let (r_lo, r_hi) = (r0 * 1e6, r0 * 1e8);
    let mut total = 0.0;
    for ray in 0..ATTRACTIVITY_RAYS {
        let dir = Vec2::from_angle(TAU * ray as f64 / ATTRACTIVITY_RAYS as f64);
        let lo = phi_k(c + dir * r_lo, pw, k);
        let hi = phi_k(c + dir * r_hi, pw, k);
        total += k as f64 * (hi - lo) / math::ln(r_hi / r_lo);
    }
    total / ATTRACTIVITY_RAYS as f64
}

/// Random point world with points in `[−half_width, half_width]²`, pairwise
/// at least `min_separation` apart.
pub fn random_point_world<R: Rng>(rng: &mut R, m: usize, half_width: f64, min_separation: f64) -> PointWorld {
    let mut pts: Vec<Vec2> = Vec::with_capacity(m + 1);
    while pts.len() < m + 1 {
        let p = Vec2::new(rng.random_range(-half_width..half_width), rng.random_range(-half_width..half_width));
        if pts.iter().all(|q| q.distance(p) >= min_separation) {
            pts.push(p);
        }
    }
    let destination = pts.remove(0);
    PointWorld::new(pts, destination)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinReport {
    pub trials: usize,
    pub arrived: usize,
    pub saddle_stall: usize,
    pub collision: usize,
    pub timeout: usize,
    pub fraction: f64,
}

/// Start clearance used when sampling random initial conditions.
pub const START_MARGIN: f64 = 1e-3;

/// Uniform collision-free starts in the workspace disk.
pub fn random_starts(scenario: &Scenario, n: usize, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r0 = scenario.workspace.outer_radius();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vec2::new(rng.random_range(-r0..r0), rng.random_range(-r0..r0));
        if scenario.workspace.clearance(p) >= START_MARGIN {
            out.push(p);
        }
    }
    out
}

/// Runs the kinematic simulation from `n_trials` seeded random starts.
pub fn basin_statistics(scenario: &Scenario, n_trials: usize, seed: u64) -> Result<BasinReport> {
    if n_trials < 100 {
        return Err(Error::InvalidParameter("at least 100 trials are required"));
    }
    let mut report = BasinReport { trials: n_trials, arrived: 0, saddle_stall: 0, collision: 0, timeout: 0, fraction: 0.0 };
    for start in random_starts(scenario, n_trials, seed) {
        let sc = Scenario { start, ..scenario.clone() };
        match simulate_kinematic(&sc)?.outcome {
            Outcome::Arrived => report.arrived += 1,
            Outcome::SaddleStall => report.saddle_stall += 1,
            Outcome::Collision => report.collision += 1,
            Outcome::Timeout => report.timeout += 1,
        }
    }
    report.fraction = report.arrived as f64 / n_trials as f64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m1() -> PointWorld {
        PointWorld::new(vec![Vec2::new(2.0, 0.0)], Vec2::ZERO)
    }

    #[test]
    fn classify_trivial_cases() {
        assert_eq!(classify_hessian(&SymMat2::new(2.0, 0.0, -2.0), 1.0), Classification::Saddle);
        assert_eq!(classify_hessian(&SymMat2::ZERO, 1.0), Classification::Degenerate);
        assert_eq!(classify_hessian(&SymMat2::new(1e-9, 0.0, -1e-9), 1.0), Classification::Unclassified);
    }

    #[test]
    fn no_critical_points_without_obstacles() {
        let pw = PointWorld::new(Vec::new(), Vec2::new(0.3, -0.2));
        assert!(find_critical_points(&pw, 1, 16).unwrap().is_empty());
        assert!(find_critical_points(&pw, 1, 15).is_err());
    }

    #[test]
    fn single_obstacle_saddle() {
        // along y = 0 the gradient x-component is 2/x − 1/(x − 2), zero at x = 4
        let cps = find_critical_points(&m1(), 2, 16).unwrap();
        assert_eq!(cps.len(), 1);
        assert!(cps[0].location.distance(Vec2::new(4.0, 0.0)) < 1e-9);
        assert_eq!(cps[0].classification, Classification::Saddle);
        let (a, b) = cps[0].eigenvalues;
        assert!((a + b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn degeneracy_scalar_without_obstacles() {
        let pw = PointWorld::new(Vec::new(), Vec2::ZERO);
        let r = degeneracy_scalar(Vec2::new(0.0, 2.0), &pw, 3).unwrap();
        assert!((r.lambda_scalar - 0.75).abs() < 1e-15);
        assert!(degeneracy_scalar(Vec2::ZERO, &pw, 3).is_err());
    }

    #[test]
    fn paired_obstacles_at_135_cancel() {
        let h = Vec2::ZERO;
        let dest = Vec2::new(-1.0, 0.0);
        let bare = PointWorld::new(vec![Vec2::new(-0.4, 0.0)], dest);
        let r = 0.7;
        let pair = vec![
            Vec2::new(-0.4, 0.0),
            -Vec2::from_angle(0.75 * PI) * r,
            -Vec2::from_angle(-0.75 * PI) * r,
        ];
        let paired = PointWorld::new(pair, dest);
        let a = degeneracy_scalar(h, &bare, 5).unwrap();
        let b = degeneracy_scalar(h, &paired, 5).unwrap();
        assert!((a.lambda_scalar - b.lambda_scalar).abs() < 1e-12);
        assert!((b.angles[1] - 0.75 * PI).abs() < 1e-12);
        assert!((b.angles[2] + 0.75 * PI).abs() < 1e-12);
        for (c, s) in b.cosines.iter().zip(&b.sines) {
            assert!((c * c + s * s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_form_identity() {
        let pw = PointWorld::new(vec![Vec2::new(1.0, 2.0), Vec2::new(-1.5, 0.3)], Vec2::new(0.2, -0.7));
        for &h in &[Vec2::new(0.4, 0.4), Vec2::new(-3.0, 1.0), Vec2::new(2.5, -2.5)] {
            for k in 3..6 {
                let r = degeneracy_scalar(h, &pw, k).unwrap();
                let hess = hess_phi_k(h, &pw, k).unwrap();
                let ed = (h - pw.destination).normalized().unwrap();
                let l = r.lambda_scalar * 2.0 / k as f64;
                assert!((hess.quad_form(ed) + l).abs() < 1e-12 * (1.0 + l.abs()));
                assert!((hess.quad_form(ed.perp()) - l).abs() < 1e-12 * (1.0 + l.abs()));
            }
        }
    }

    #[test]
    fn nelder_mead_minimises_rosenbrock() {
        let f = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let (x, v) = nelder_mead(f, &[-1.2, 1.0], 0.5, 5000, 1e-20);
        assert!(v < 1e-12, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn pair_at_135_cannot_degenerate() {
        let opts = DegenerateSearchOptions { free_pair_angle: false, restarts: 5, ..Default::default() };
        let out = degenerate_search(4, 1, &opts).unwrap();
        assert!(matches!(out, DegenerateOutcome::NotFound { .. }));
    }

    #[test]
    fn free_angle_search_finds_a_degenerate_point() {
        let out = degenerate_search(4, 1, &DegenerateSearchOptions::default()).unwrap();
        let DegenerateOutcome::Found(a) = out else { panic!("not found: {out:?}") };
        let hd2 = (a.point - a.point_world.destination).norm_sq();
        assert!(a.report.hessian_frobenius < 1e-6 * 2.0 / hd2);
        assert!(grad_phi_k(a.point, &a.point_world, 4).unwrap().norm() < 1e-8);
        // a small move of one obstacle restores a regular Hessian
        let mut moved = a.point_world.clone();
        moved.obstacle_points[0] += Vec2::new(1e-3, 0.0);
        let f = hess_phi_k(a.point, &moved, 4).unwrap().frobenius();
        assert!(f >= 10.0 * a.report.hessian_frobenius);
    }

    #[test]
    fn attractivity_examples() {
        assert!(attractivity_check(&PointWorld::new(Vec::new(), Vec2::ZERO), 1));
        assert!(attractivity_check(&m1(), 2));
        let pw = PointWorld::new(vec![Vec2::new(1.0, 0.5), Vec2::new(-1.0, 0.2)], Vec2::new(0.3, 0.9));
        assert!(attractivity_check(&pw, 3));
        assert!(!attractivity_check(&pw, 2));
        assert!((growth_exponent(&pw, 3) - 2.0).abs() < 1e-3);
        assert!(growth_exponent(&pw, 2).abs() < 1e-3);
    }
}
