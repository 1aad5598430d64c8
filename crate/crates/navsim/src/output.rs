//! CSV and JSON writers for simulation and analysis results.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces the logged values bit for bit.

use std::io::{Read, Write};

use navsim_core::analysis::CriticalPoint;
use navsim_core::sim::{DiscoveryEvent, RobotModel, Sample, Scenario, Trajectory};
use navsim_core::Vec2;
use serde::Serialize;

pub const TRAJECTORY_HEADER: [&str; 10] = ["t", "x", "y", "vx", "vy", "theta", "V", "n", "k", "lambda"];
pub const EVENTS_HEADER: [&str; 8] = ["time", "obstacle_index", "speed_at_discovery", "k_after", "x", "y", "axis_x", "axis_y"];
pub const CRITICAL_POINTS_HEADER: [&str; 6] = ["hx", "hy", "grad_norm", "eig1", "eig2", "class"];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv<W: Write>(out: W, samples: &[Sample]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in samples {
        w.write_record([
            fmt_f64(s.t),
            fmt_f64(s.x),
            fmt_f64(s.y),
            fmt_f64(s.vx),
            fmt_f64(s.vy),
            fmt_f64(s.theta),
            fmt_f64(s.energy),
            s.n.to_string(),
            s.k.to_string(),
            fmt_f64(s.lambda),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, row: usize) -> Result<T, OutputError> {
    rec.get(i)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| OutputError::Malformed { row, message: format!("bad value in column {i}") })
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<Sample>, OutputError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        out.push(Sample {
            t: field(&rec, 0, row)?,
            x: field(&rec, 1, row)?,
            y: field(&rec, 2, row)?,
            vx: field(&rec, 3, row)?,
            vy: field(&rec, 4, row)?,
            theta: field(&rec, 5, row)?,
            energy: field(&rec, 6, row)?,
            n: field(&rec, 7, row)?,
            k: field(&rec, 8, row)?,
            lambda: field(&rec, 9, row)?,
        });
    }
    Ok(out)
}

pub fn write_events_csv<W: Write>(out: W, events: &[DiscoveryEvent]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENTS_HEADER)?;
    for e in events {
        w.write_record([
            fmt_f64(e.time),
            e.obstacle_index.to_string(),
            fmt_f64(e.speed_at_discovery),
            e.k_after.to_string(),
            fmt_f64(e.position.x),
            fmt_f64(e.position.y),
            fmt_f64(e.axis.x),
            fmt_f64(e.axis.y),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events_csv<R: Read>(input: R) -> Result<Vec<DiscoveryEvent>, OutputError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        out.push(DiscoveryEvent {
            time: field(&rec, 0, row)?,
            obstacle_index: field(&rec, 1, row)?,
            speed_at_discovery: field(&rec, 2, row)?,
            k_after: field(&rec, 3, row)?,
            position: Vec2::new(field(&rec, 4, row)?, field(&rec, 5, row)?),
            axis: Vec2::new(field(&rec, 6, row)?, field(&rec, 7, row)?),
        });
    }
    Ok(out)
}

pub fn write_critical_points_csv<W: Write>(out: W, points: &[CriticalPoint]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CRITICAL_POINTS_HEADER)?;
    for c in points {
        w.write_record([
            fmt_f64(c.location.x),
            fmt_f64(c.location.y),
            fmt_f64(c.gradient_norm),
            fmt_f64(c.eigenvalues.0),
            fmt_f64(c.eigenvalues.1),
            c.classification.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub outcome: &'static str,
    pub final_time: f64,
    pub samples: usize,
    pub max_speed: f64,
    /// `√(2μ/m)` for the dynamic robot.
    pub speed_bound: Option<f64>,
    pub min_clearance: f64,
    pub discovery_count: usize,
    pub discovered: Vec<usize>,
    pub d_min: f64,
}

impl Summary {
    pub fn new(scenario: &Scenario, tr: &Trajectory) -> Self {
        Summary {
            outcome: tr.outcome.as_str(),
            final_time: tr.samples.last().map_or(0.0, |s| s.t),
            samples: tr.samples.len(),
            max_speed: tr.max_speed(),
            speed_bound: match scenario.robot {
                RobotModel::Dynamic { mass } => Some((2.0 * scenario.control.mu / mass).sqrt()),
                RobotModel::Kinematic => None,
            },
            min_clearance: tr.min_clearance,
            discovery_count: tr.events.len(),
            discovered: tr.events.iter().map(|e| e.obstacle_index).collect(),
            d_min: scenario.d_min().unwrap_or(f64::NAN),
        }
    }
}
