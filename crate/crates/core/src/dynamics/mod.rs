//! Density-matrix and quantum-trajectory engines.

pub mod lindblad;
pub mod mcwf;

pub use lindblad::{integrate_lindblad, Channel, LindbladRun, LindbladSystem, Method};
pub use mcwf::{
    ensemble_reduce, jump_statistics, run_mcwf, JumpEvent, JumpScheme, JumpStatistics, McwfOptions,
    TrajectoryEnsemble,
};
