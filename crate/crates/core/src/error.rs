use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("ion index {index} out of range (system has {n_ions} ions)")]
    IonIndexOutOfRange { index: usize, n_ions: usize },

    #[error("level {level} is not available in the {space} space")]
    InvalidLevel { level: &'static str, space: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation not supported on the {0} space")]
    UnsupportedSpace(&'static str),

    #[error("density matrix invalid: {0}")]
    InvalidDensityMatrix(String),

    #[error("state left the one-excitation block form: {0}")]
    BlockFormViolation(String),

    #[error("time grid invalid: {0}")]
    InvalidTimeGrid(String),

    #[error("table column `{0}` invalid: {1}")]
    InvalidColumn(String, String),

    #[error("positivity violated at t = {t} us (smallest eigenvalue {eigenvalue:e})")]
    PositivityViolation { t: f64, eigenvalue: f64 },

    #[error("trace drifted to {trace} at t = {t} us")]
    TraceDrift { t: f64, trace: f64 },

    #[error("integration step {step:e} us underflows the interval {interval:e} us")]
    StepUnderflow { step: f64, interval: f64 },

    #[error("Fock truncation exceeded: population {population:e} in the n = {n_max} layer at t = {t} us")]
    FockTruncation { t: f64, n_max: usize, population: f64 },

    #[error("jump probability {probability} still above cap {cap} after {refinements} step refinements")]
    JumpCapExceeded { probability: f64, cap: f64, refinements: u32 },

    #[error("time-dependent generator cannot drive this engine: {0}")]
    TimeDependentGenerator(&'static str),

    #[error("engine {engine} cannot run model {model}")]
    EngineModelMismatch { engine: &'static str, model: &'static str },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of a numerical method on valid input, as opposed to
    /// rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PositivityViolation { .. }
                | Error::TraceDrift { .. }
                | Error::StepUnderflow { .. }
                | Error::FockTruncation { .. }
                | Error::JumpCapExceeded { .. }
                | Error::BlockFormViolation(_)
                | Error::Numerical(_)
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
