//! Newton-Raphson flow tracking control with baselines and a benchmark
//! harness.

pub mod fbl;
pub mod math;
pub mod model;
pub mod nmpc;
pub mod nr;
pub mod predict;
pub mod traj;
