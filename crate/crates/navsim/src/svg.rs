//! Fixed-style SVG rendering of a run: boundary, obstacles coloured by
//! discovery order, the path, and sensing sectors at every discovery and at
//! the final position.

use std::fmt::Write;

use navsim_core::sim::{initialize_known, Scenario, Trajectory};
use navsim_core::Vec2;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
const MAX_PATH_POINTS: usize = 4000;
const ARC_SEGMENTS: usize = 24;
/// Discovery-order colours, cycled.
const PALETTE: [&str; 8] = ["#d62728", "#ff7f0e", "#bcbd22", "#2ca02c", "#17becf", "#1f77b4", "#9467bd", "#e377c2"];
const INITIALLY_KNOWN: &str = "#7f7f7f";

struct Frame {
    r0: f64,
    scale: f64,
}

impl Frame {
    fn pt(&self, p: Vec2) -> (f64, f64) {
        (MARGIN + (p.x + self.r0) * self.scale, MARGIN + (self.r0 - p.y) * self.scale)
    }

    fn len(&self, l: f64) -> f64 {
        l * self.scale
    }
}

fn sector_path(f: &Frame, pole: Vec2, axis: Vec2, range: f64, aperture: f64) -> String {
    let mut d = String::new();
    let (px, py) = f.pt(pole);
    let _ = write!(d, "M{px:.3},{py:.3}");
    for i in 0..=ARC_SEGMENTS {
        let a = -aperture / 2.0 + aperture * i as f64 / ARC_SEGMENTS as f64;
        let (x, y) = f.pt(pole + axis.rotate(a) * range);
        let _ = write!(d, " L{x:.3},{y:.3}");
    }
    d.push_str(" Z");
    d
}

/// Renders the run as a standalone SVG document.
pub fn render_svg(scenario: &Scenario, tr: &Trajectory) -> String {
    let ws = &scenario.workspace;
    let r0 = ws.outer_radius();
    let f = Frame { r0, scale: (SIZE - 2.0 * MARGIN) / (2.0 * r0) };
    let initial = initialize_known(ws, scenario.start, &scenario.sensor).ok();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let (cx, cy) = f.pt(Vec2::ZERO);
    let _ = writeln!(
        s,
        r#"<circle class="boundary" cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="black" stroke-width="2"/>"#,
        f.len(r0)
    );
    for (i, o) in ws.obstacles().iter().enumerate() {
        let (x, y) = f.pt(o.center);
        let order = tr.events.iter().position(|e| e.obstacle_index == i);
        let known_at_start = initial.as_ref().is_some_and(|w| w.obstacles()[i].known);
        let style = match order {
            Some(j) => format!(r#"fill="{}" stroke="black""#, PALETTE[j % PALETTE.len()]),
            None if known_at_start => format!(r#"fill="{INITIALLY_KNOWN}" stroke="black""#),
            None => r#"fill="none" stroke="black" stroke-dasharray="4,3""#.to_string(),
        };
        let _ = writeln!(
            s,
            r#"<circle class="obstacle" data-index="{i}" cx="{x:.3}" cy="{y:.3}" r="{:.3}" {style}/>"#,
            f.len(o.radius)
        );
        if let Some(j) = order {
            let _ = writeln!(
                s,
                r#"<text x="{x:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="middle">O{}</text>"#,
                y + 4.0,
                j + 1
            );
        }
    }
    let sector_style = r##"fill="#1f77b4" fill-opacity="0.15" stroke="#1f77b4" stroke-width="1""##;
    for e in &tr.events {
        let d = sector_path(&f, e.position, e.axis, scenario.sensor.range, scenario.sensor.aperture);
        let _ = writeln!(s, r#"<path class="sector" d="{d}" {sector_style}/>"#);
    }
    if let Some(last) = tr.samples.last() {
        let d = sector_path(&f, last.position(), tr.final_axis, scenario.sensor.range, scenario.sensor.aperture);
        let _ = writeln!(s, r#"<path class="sector final" d="{d}" {sector_style}/>"#);
    }
    if !tr.samples.is_empty() {
        let stride = tr.samples.len().div_ceil(MAX_PATH_POINTS).max(1);
        let mut pts = String::new();
        let mut push = |p: Vec2| {
            let (x, y) = f.pt(p);
            let _ = write!(pts, "{x:.3},{y:.3} ");
        };
        for smp in tr.samples.iter().step_by(stride) {
            push(smp.position());
        }
        if (tr.samples.len() - 1) % stride != 0 {
            push(tr.samples[tr.samples.len() - 1].position());
        }
        let _ = writeln!(s, r#"<polyline class="path" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, pts.trim_end());
    }
    let (sx, sy) = f.pt(scenario.start);
    let _ = writeln!(s, r#"<circle class="start" cx="{sx:.3}" cy="{sy:.3}" r="4" fill="black"/>"#);
    let (dx, dy) = f.pt(ws.destination());
    let _ = writeln!(
        s,
        r#"<path class="destination" d="M{:.3},{dy:.3} L{:.3},{dy:.3} M{dx:.3},{:.3} L{dx:.3},{:.3}" stroke="green" stroke-width="2"/>"#,
        dx - 6.0,
        dx + 6.0,
        dy - 6.0,
        dy + 6.0
    );
    s.push_str("</svg>\n");
    s
}
