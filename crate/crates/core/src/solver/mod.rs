//! Damped Newton iteration, direct sparse solves, and the backward time
//! march over incremental step problems.

mod linear;
mod march;
mod newton;

pub use linear::{linear_solve, SparseLu};
pub use march::{
    time_march, IncrementalProblem, MarchStatus, TimeMarchConfig, Trajectory, TrajectoryStep,
};
pub use newton::{newton_solve, NewtonConfig, NewtonReport};
