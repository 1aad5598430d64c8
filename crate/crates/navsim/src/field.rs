//! Sampling the navigation function on a regular grid.

use std::io::Write;

use navsim_core::sim::Scenario;
use navsim_core::{NavFunction, Vec2};

use crate::output::{fmt_f64, OutputError};

pub const MIN_RESOLUTION: usize = 16;
pub const MAX_RESOLUTION: usize = 4096;

/// `values[j * resolution + i]` holds the cell at column `i`, row `j`
/// (row 0 at the bottom). `None` marks cells outside the free space.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub resolution: usize,
    pub lo: Vec2,
    pub hi: Vec2,
    pub values: Vec<Option<f64>>,
}

impl FieldGrid {
    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        let n = self.resolution as f64;
        Vec2::new(
            self.lo.x + (self.hi.x - self.lo.x) * (i as f64 + 0.5) / n,
            self.lo.y + (self.hi.y - self.lo.y) * (j as f64 + 0.5) / n,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[j * self.resolution + i]
    }
}

/// Samples the navigation function built with every obstacle known over the
/// workspace bounding box.
pub fn compute_field(scenario: &Scenario, resolution: usize) -> navsim_core::Result<FieldGrid> {
    if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&resolution) {
        return Err(navsim_core::Error::InvalidParameter("resolution must lie in [16, 4096]"));
    }
    let mut ws = scenario.workspace.clone();
    for i in 0..ws.obstacles().len() {
        ws.mark_known(i);
    }
    let nf = NavFunction::for_workspace(&ws)?;
    let r0 = ws.outer_radius();
    let mut grid = FieldGrid {
        resolution,
        lo: Vec2::new(-r0, -r0),
        hi: Vec2::new(r0, r0),
        values: Vec::with_capacity(resolution * resolution),
    };
    for j in 0..resolution {
        for i in 0..resolution {
            let p = grid.cell_center(i, j);
            let v = if ws.clearance(p) > 0.0 { nf.value(p).ok() } else { None };
            grid.values.push(v);
        }
    }
    Ok(grid)
}

/// Long-form CSV `x,y,varphi`; unreachable cells have an empty `varphi`.
pub fn write_field_csv<W: Write>(out: W, grid: &FieldGrid) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "varphi"])?;
    for j in 0..grid.resolution {
        for i in 0..grid.resolution {
            let c = grid.cell_center(i, j);
            w.write_record([fmt_f64(c.x), fmt_f64(c.y), grid.get(i, j).map(fmt_f64).unwrap_or_default()])?;
        }
    }
    w.flush()?;
    Ok(())
}
