use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The point lies on or beyond the outer workspace boundary.
    #[error("point is outside the workspace interior")]
    OutsideWorkspace,
    /// The point lies on or inside obstacle `index`.
    #[error("point lies inside obstacle {index}")]
    InsideObstacle { index: usize },
    /// Point-world evaluation too close to a pole. `index == None` is the destination.
    #[error("evaluation within the pole guard of {}", pole_name(*.index))]
    NearPole { index: Option<usize> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("obstacles {a} and {b} overlap or touch")]
    ObstacleOverlap { a: usize, b: usize },
    #[error("obstacle {index} does not fit strictly inside the outer boundary")]
    ObstacleOutsideBoundary { index: usize },
    #[error("destination is not in the free interior of the workspace")]
    DestinationNotFree,
    #[error("no feasible collapse neighborhood for obstacle {index}")]
    NeighborhoodInfeasible { index: usize },
    #[error("start position is not in the free interior of the workspace")]
    StartNotFree,
    #[error("numerical failure: {0}")]
    Numeric(&'static str),
}

fn pole_name(index: Option<usize>) -> alloc::string::String {
    use alloc::format;
    match index {
        Some(i) => format!("obstacle image {i}"),
        None => format!("destination image"),
    }
}
