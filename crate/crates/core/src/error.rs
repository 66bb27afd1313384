use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight is singular at {point:?}")]
    SingularWeight { point: Vec<f64> },

    #[error("unknown builtin system {0:?} (expected linear2d, vdp_modified or port_hamiltonian_demo)")]
    UnknownSystem(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("{algorithm} did not converge after {iterations} iterations")]
    NoConvergence {
        algorithm: &'static str,
        iterations: usize,
    },

    #[error("singular linear system (pivot {pivot:e} at column {column})")]
    SingularSystem { pivot: f64, column: usize },

    #[error(
        "singular Sylvester operator: eigenvalues {lambda_i} and {lambda_j} sum to {sum:e}; \
         a constant mode is probably retained, enable the equilibrium-vanishing basis"
    )]
    SingularSylvester {
        lambda_i: String,
        lambda_j: String,
        sum: f64,
    },

    #[error("Gramian has eigenvalue {value:e} below -1e-10 * {lambda_max:e}")]
    IndefiniteGramian { value: f64, lambda_max: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("cost does not decay: tail bound {tail_bound:e} at horizon {horizon} (value so far {value})")]
    NonDecayingCost {
        value: f64,
        horizon: f64,
        tail_bound: f64,
    },

    #[error("all Gram eigenvalues dropped (max {lambda_max:e})")]
    EmptyBasis { lambda_max: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
