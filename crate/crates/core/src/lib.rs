//! Harmonic navigation functions for planar robots with sector-bounded sensing.
//!
//! The workspace (an outer disk containing disk obstacles) is mapped onto a
//! point world by a smooth navigation transformation. On the point world a
//! harmonic potential with exponent `k = n + 1` (n = number of known
//! obstacles) is squashed to `[0, 1]`, which yields a navigation function
//! without any tuning. The crate also carries the kinematic and dynamic
//! feedback laws, a deterministic RK4 simulator with on-the-fly obstacle
//! discovery, and numerical checks of the structural properties of the
//! potential (saddle-only critical points, degeneracy, attractivity).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod control;
mod error;
pub mod geometry;
mod math;
pub mod navtrans;
pub mod potential;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{DiskObstacle, Mat2, SensingSector, SymMat2, Vec2, Workspace};
pub use navtrans::{CollapseNeighborhood, NavTransform, PointWorld};
pub use potential::NavFunction;
