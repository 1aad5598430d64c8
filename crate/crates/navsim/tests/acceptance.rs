//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use navsim::output::{write_events_csv, write_trajectory_csv};
use navsim::scenario::load_scenario;
use navsim_core::analysis::{
    attractivity_check, basin_statistics, degeneracy_scalar, degenerate_search, find_critical_points, growth_exponent,
    random_point_world, BasinReport, Classification, DegenerateOutcome, DegenerateSearchOptions,
};
use navsim_core::control::{dissipation, stopping_distance, DampingState};
use navsim_core::geometry::min_detection_distance;
use navsim_core::potential::{grad_phi_k, grad_varphi_point, hess_phi_k, hessian_at_destination, phi_k, varphi};
use navsim_core::sim::{simulate, Outcome, Scenario, Trajectory};
use navsim_core::{PointWorld, SymMat2, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn scenario(name: &str) -> Scenario {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    load_scenario(&p).unwrap_or_else(|e| panic!("{e}"))
}

/// The same 20 worlds for criteria 1 to 4, `M = 0..=6` cycled.
fn worlds(seed: u64, n: usize) -> Vec<PointWorld> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| random_point_world(&mut rng, i % 7, 2.0, 0.5)).collect()
}

/// Random points in `[−3, 3]²` at least `clear` away from every pole.
fn sample_points(rng: &mut ChaCha8Rng, pw: &PointWorld, n: usize, clear: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let h = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let near = h.distance(pw.destination) < clear || pw.obstacle_points.iter().any(|p| h.distance(*p) < clear);
        if !near {
            out.push(h);
        }
    }
    out
}

fn fd_gradient(f: impl Fn(Vec2) -> f64, h: Vec2, e: f64) -> Vec2 {
    Vec2::new(
        (f(h + Vec2::new(e, 0.0)) - f(h - Vec2::new(e, 0.0))) / (2.0 * e),
        (f(h + Vec2::new(0.0, e)) - f(h - Vec2::new(0.0, e))) / (2.0 * e),
    )
}

fn fd_hessian(f: impl Fn(Vec2) -> f64, h: Vec2, e: f64) -> SymMat2 {
    let v = |dx: f64, dy: f64| f(h + Vec2::new(dx, dy));
    let c = v(0.0, 0.0);
    SymMat2::new(
        (v(e, 0.0) - 2.0 * c + v(-e, 0.0)) / (e * e),
        (v(e, e) - v(e, -e) - v(-e, e) + v(-e, -e)) / (4.0 * e * e),
        (v(0.0, e) - 2.0 * c + v(0.0, -e)) / (e * e),
    )
}

fn sym_diff(a: &SymMat2, b: &SymMat2) -> f64 {
    SymMat2::new(a.xx - b.xx, a.xy - b.xy, a.yy - b.yy).frobenius()
}

fn c1_derivative_oracles() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut g_err, mut v_err, mut h_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut n = 0;
    for pw in worlds(1, 20) {
        let k = pw.count() as u32 + 1;
        for h in sample_points(&mut rng, &pw, 50, 0.3) {
            let g = grad_phi_k(h, &pw, k).unwrap();
            let fd = fd_gradient(|p| phi_k(p, &pw, k), h, 1e-6);
            g_err = g_err.max(g.distance(fd) / g.norm());
            let gv = grad_varphi_point(h, &pw, k).unwrap();
            let fdv = fd_gradient(|p| varphi(p, &pw, k), h, 1e-6);
            v_err = v_err.max(gv.distance(fdv) / gv.norm());
            let hs = hess_phi_k(h, &pw, k).unwrap();
            let fdh = fd_hessian(|p| phi_k(p, &pw, k), h, 1e-4);
            h_err = h_err.max(sym_diff(&hs, &fdh) / hs.frobenius());
            n += 1;
        }
    }
    let el = t.elapsed();
    verdict(
        g_err < 1e-6 && v_err < 1e-6 && h_err < 1e-5 && n == 1000 && el < Duration::from_secs(10),
        format!("{n} points, max rel err grad {g_err:.2e}, squashed grad {v_err:.2e}, Hessian {h_err:.2e}, {el:.2?}"),
    )
}

fn c2_harmonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut tr, mut lap) = (0.0f64, 0.0f64);
    for pw in worlds(1, 20) {
        let k = pw.count() as u32 + 1;
        for h in sample_points(&mut rng, &pw, 50, 0.3) {
            let hs = hess_phi_k(h, &pw, k).unwrap();
            tr = tr.max(hs.trace().abs() / hs.frobenius());
            let fdh = fd_hessian(|p| phi_k(p, &pw, k), h, 1e-4);
            lap = lap.max(fdh.trace().abs());
        }
    }
    verdict(tr < 1e-12 && lap < 1e-5, format!("max |tr H|/|H|_F {tr:.2e}, max |FD Laplacian| {lap:.2e}"))
}

fn c3_destination_hessian() -> Verdict {
    let mut worst = 0.0f64;
    let mut worst_alt = f64::INFINITY;
    for pw in worlds(3, 20) {
        let k = pw.count() as u32 + 1;
        let an = hessian_at_destination(&pw, k);
        let fd = fd_hessian(|p| varphi(p, &pw, k), pw.destination, 1e-4);
        worst = worst.max((an.xx - fd.xx).abs()).max((an.xy - fd.xy).abs()).max((an.yy - fd.yy).abs());
        // same form with a 4/k exponent, for comparison
        let log_prod: f64 = pw.obstacle_points.iter().map(|p| (pw.destination - *p).norm_sq().ln()).sum();
        let alt = SymMat2::scalar(2.0 * (-2.0 * log_prod / k as f64).exp());
        if pw.count() > 0 {
            worst_alt = worst_alt.min(sym_diff(&alt, &fd));
        }
    }
    verdict(worst < 1e-6, format!("max entry error {worst:.2e} (4/k exponent variant: min error {worst_alt:.2e})"))
}

fn c4_attractivity() -> Verdict {
    let ws = worlds(4, 20);
    let pass_k = ws.iter().all(|pw| attractivity_check(pw, pw.count() as u32 + 1));
    let with_obstacles: Vec<&PointWorld> = ws.iter().filter(|pw| pw.count() > 0).collect();
    let stagnant = with_obstacles.iter().map(|pw| growth_exponent(pw, pw.count() as u32).abs()).fold(0.0, f64::max);
    let rejected = with_obstacles.iter().filter(|pw| !attractivity_check(pw, pw.count() as u32)).count();
    verdict(
        pass_k && stagnant < 1e-3,
        format!(
            "k = M+1 passes on all 20: {pass_k}; k = M max |growth exponent| {stagnant:.2e}, check fails on {rejected}/{}",
            with_obstacles.len()
        ),
    )
}

fn c5_saddle_only() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut total, mut saddles, mut minima, mut other) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    let mut too_many = 0;
    for i in 0..50 {
        let m = 1 + i % 6;
        let pw = random_point_world(&mut rng, m, 2.0, 0.3);
        let k = m as u32 + 1;
        let cps = find_critical_points(&pw, k, 24).unwrap();
        if cps.len() > m {
            too_many += 1;
        }
        for cp in cps {
            total += 1;
            let (a, b) = cp.eigenvalues;
            worst = worst.max((a + b).abs() / a.abs().max(b.abs()));
            match cp.classification {
                Classification::Saddle => saddles += 1,
                Classification::DestinationMinimum => minima += 1,
                _ => other += 1,
            }
        }
    }
    let el = t.elapsed();
    verdict(
        total > 0 && saddles == total && minima == 0 && worst < 1e-9 && too_many == 0 && el < Duration::from_secs(60),
        format!("{total} critical points, {saddles} saddles, {minima} minima, {other} other, max |λ1+λ2|/|λ| {worst:.2e}, {el:.2?}"),
    )
}

fn c6_degeneracy() -> Verdict {
    let out = degenerate_search(4, 1, &DegenerateSearchOptions::default()).unwrap();
    let search = match &out {
        DegenerateOutcome::Found(a) => {
            let hd2 = (a.point - a.point_world.destination).norm_sq();
            let hs = hess_phi_k(a.point, &a.point_world, 4).unwrap();
            let ed = (a.point - a.point_world.destination).normalized().unwrap();
            let ident = (hs.quad_form(ed) + 0.5 * a.report.lambda_scalar).abs();
            let ok = a.gradient_norm < 1e-8 && hs.frobenius() < 1e-6 * 2.0 / hd2 && ident < 1e-9;
            (ok, format!(
                "found at pair angle {:.2}°: |∇φ| {:.1e}, |H|_F {:.1e}, identity {:.1e}, distance-ratio residual {:.3e}, closed-form residual {:.3e}",
                a.pair_angle.to_degrees(), a.gradient_norm, hs.frobenius(), ident, a.distance_ratio_residual, a.closed_form_residual
            ))
        }
        DegenerateOutcome::NotFound { best_residual, .. } => (true, format!("not_found, best residual {best_residual:.3e}")),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let m = checked % 6;
        let pw = random_point_world(&mut rng, m, 2.0, 0.3);
        let k = m as u32 + 1 + (checked % 3) as u32;
        let h = sample_points(&mut rng, &pw, 1, 0.2)[0];
        if grad_phi_k(h, &pw, k).unwrap().norm() < 1e-6 {
            continue;
        }
        let r = degeneracy_scalar(h, &pw, k).unwrap();
        let hs = hess_phi_k(h, &pw, k).unwrap();
        let ed = (h - pw.destination).normalized().unwrap();
        let target = -2.0 / k as f64 * r.lambda_scalar;
        let scale = target.abs().max(1.0);
        worst = worst.max((hs.quad_form(ed) - target).abs() / scale).max((hs.quad_form(ed.perp()) + target).abs() / scale);
        checked += 1;
    }
    verdict(search.0 && worst < 1e-9, format!("{}; identity at 1000 points max err {worst:.2e}", search.1))
}

fn between_discoveries(tr: &Trajectory, value: impl Fn(&navsim_core::sim::Sample) -> f64, slack: f64) -> usize {
    tr.samples.windows(2).filter(|w| w[0].n == w[1].n && value(&w[1]) > value(&w[0]) + slack).count()
}

fn trajectory_bytes(tr: &Trajectory) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &tr.samples).unwrap();
    write_events_csv(&mut buf, &tr.events).unwrap();
    buf
}

fn c7_kinematic() -> (Verdict, Vec<u8>) {
    let t = Instant::now();
    let s = scenario("fig1_kinematic.toml");
    let tr = simulate(&s).unwrap();
    let el = t.elapsed();
    let ups = between_discoveries(&tr, |x| x.theta, 1e-9);
    let v = verdict(
        tr.outcome == Outcome::Arrived && tr.min_clearance > 0.0 && tr.events.len() == 6 && ups == 0 && el < Duration::from_secs(30),
        format!(
            "{}, {} discoveries, min clearance {:.3}, Θ increases {ups}, {el:.2?}",
            tr.outcome.as_str(),
            tr.events.len(),
            tr.min_clearance
        ),
    );
    (v, trajectory_bytes(&tr))
}

fn c8_dynamic() -> (Verdict, Vec<u8>) {
    let s = scenario("fig2_dynamic.toml");
    let tr = simulate(&s).unwrap();
    let navsim_core::sim::RobotModel::Dynamic { mass } = s.robot else { panic!("dynamic scenario expected") };
    let bound = (2.0 * s.control.mu / mass).sqrt();
    let ups = between_discoveries(&tr, |x| x.energy, 1e-9);
    let d = s.workspace.destination();
    let tail: Vec<f64> = tr.samples.iter().skip_while(|x| x.theta >= 0.01).map(|x| x.position().distance(d)).collect();
    let non_mono = tail.windows(2).filter(|w| w[1] > w[0]).count();
    let v = verdict(
        tr.outcome == Outcome::Arrived
            && tr.min_clearance > 0.0
            && tr.max_speed() < bound
            && s.workspace.rho_min() == 0.05
            && ups == 0
            && non_mono == 0
            && !tail.is_empty(),
        format!(
            "{}, max speed {:.4} < {bound:.5}, min clearance {:.3}, V increases {ups}, distance increases after Θ<0.01: {non_mono}/{}",
            tr.outcome.as_str(),
            tr.max_speed(),
            tr.min_clearance,
            tail.len()
        ),
    );
    (v, trajectory_bytes(&tr))
}

fn c9_stopping_distance() -> (Verdict, Vec<u8>) {
    let mut worst = 0.0f64;
    let mut rows = String::new();
    let empty = PointWorld::new(Vec::new(), Vec2::ZERO);
    for (deg, rho) in [(60.0f64, 0.05), (60.0, 0.3), (30.0, 0.1), (120.0, 0.2)] {
        let d_min = min_detection_distance(1.0, deg.to_radians(), rho).unwrap();
        for (speed, mass) in [(1.0, 1.0), (0.37, 2.0), (4.0, 0.5)] {
            let ds = DampingState { last_discovery_speed: speed, d_min };
            let lambda = dissipation(&ds, 12.0, 10.0, mass, &empty, 1);
            let dist = stopping_distance(speed, mass, lambda);
            worst = worst.max((dist - d_min).abs());
            rows.push_str(&format!("{deg},{rho},{speed},{mass},{lambda:.16e},{dist:.16e}\n"));
        }
    }
    (verdict(worst < 1e-12, format!("max |m·v/λ − d_min| {worst:.2e}")), rows.into_bytes())
}

fn basin_csv(r: &BasinReport) -> Vec<u8> {
    format!("trials,arrived,saddle_stall,collision,timeout,fraction\n{},{},{},{},{},{:.16e}\n", r.trials, r.arrived, r.saddle_stall, r.collision, r.timeout, r.fraction)
        .into_bytes()
}

fn c10_basins() -> (Verdict, Vec<u8>) {
    let t = Instant::now();
    let s = scenario("basins3.toml");
    let r = basin_statistics(&s, 500, 7).unwrap();
    let el = t.elapsed();
    let non_arrived = r.trials - r.arrived;
    let v = verdict(
        r.fraction >= 0.99 && r.saddle_stall == non_arrived && el < Duration::from_secs(300),
        format!(
            "{}/{} arrived ({:.3}), saddle_stall {}, collision {}, timeout {}, {el:.2?}",
            r.arrived, r.trials, r.fraction, r.saddle_stall, r.collision, r.timeout
        ),
    );
    (v, basin_csv(&r))
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict)> = vec![
        (1, "gradient/Hessian finite-difference oracles", c1_derivative_oracles()),
        (2, "harmonicity", c2_harmonicity()),
        (3, "destination Hessian", c3_destination_hessian()),
        (4, "attractivity", c4_attractivity()),
        (5, "saddle-only critical points", c5_saddle_only()),
        (6, "degeneracy", c6_degeneracy()),
    ];
    let (v7, b7) = c7_kinematic();
    let (v8, b8) = c8_dynamic();
    let (v9, b9) = c9_stopping_distance();
    let (v10, b10) = c10_basins();
    let first = [b7, b8, b9, b10];
    let second = [c7_kinematic().1, c8_dynamic().1, c9_stopping_distance().1, c10_basins().1];
    let same: Vec<bool> = first.iter().zip(&second).map(|(a, b)| a == b).collect();
    let bytes: usize = first.iter().map(Vec::len).sum();
    results.push((7, "kinematic navigation", v7));
    results.push((8, "dynamic navigation", v8));
    results.push((9, "stopping distance", v9));
    results.push((10, "basin statistics", v10));
    results.push((
        11,
        "determinism",
        verdict(same.iter().all(|&s| s), format!("criteria 7-10 CSV identical across runs: {same:?}, {bytes} bytes")),
    ));
    let mut failed = 0;
    for (n, name, v) in &results {
        println!("{} {n:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
