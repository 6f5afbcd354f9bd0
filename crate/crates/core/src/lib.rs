//! Two three-level ions in a lossy optical cavity: the exact lossy
//! Tavis-Cummings solution, the effective two-level model obtained by
//! eliminating the excited level, density-matrix and quantum-trajectory
//! engines, and the concurrence analyses built on them.
//!
//! Frequencies and rates are stored as "2π MHz" values ν (angular frequency
//! 2πν rad/μs) and times are in μs. The engines apply the 2π factor.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod observables;
pub mod operator;
pub mod params;
pub mod reduce;
pub mod series;
pub mod space;

pub use analytic::{AmplitudePair, DickeParams};
pub use num_complex::Complex64;
pub use dynamics::{
    ensemble_reduce, integrate_lindblad, jump_statistics, run_mcwf, Channel, JumpScheme, JumpStatistics,
    LindbladRun, LindbladSystem, McwfOptions, Method, TrajectoryEnsemble,
};
pub use error::{Error, Result};
pub use experiments::{
    run_scenario, sweep, Engine, InitialState, LaserDetuning, ModelKind, Scenario, SweepAxis, SweepSpec,
};
pub use observables::{concurrence_x_form, partial_trace_cavity, DensityMatrix};
pub use operator::{build_operator, HarmonicOp, LinearOp, OperatorSpec};
pub use params::{LaserDrive, ModelParams};
pub use reduce::{reduce, ChannelLabel, EffectiveParams, Frame, JumpChannel};
pub use series::TimeSeriesTable;
pub use space::{HilbertSpace, Level, SpaceKind};
