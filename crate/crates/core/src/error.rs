use thiserror::Error;

use crate::problem::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {}", join_violations(.0))]
    InvalidProblem(Vec<Violation>),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("unknown instance `{name}` (valid names: {})", .valid.join(", "))]
    UnknownInstance {
        name: String,
        valid: Vec<&'static str>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{n} qubits exceeds the limit of {max} for this operation")]
    TooLarge { n: usize, max: usize },

    #[error("index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("integrator did not converge after {halvings} step halvings")]
    Convergence { halvings: usize },

    #[error("target state ill-defined: projection of |+> onto the degenerate ground space has norm {projection_norm:e}")]
    IllDefinedTarget { projection_norm: f64 },

    #[error("operator is not Hermitian (asymmetry {asymmetry:e})")]
    NonHermitian { asymmetry: f64 },

    #[error("kink undefined: bond {bond} has zero coupling")]
    UndefinedKink { bond: usize },

    #[error("cannot synthesize conditional phase {phase} with gates limited to [{min}, {max}]")]
    InfeasibleSynthesis { phase: f64, min: f64, max: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("power-law fit: {0}")]
    Fit(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
