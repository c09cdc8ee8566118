use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^H| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator norm {norm} exceeds 1, map is not a contraction")]
    NotContraction { norm: f64 },

    #[error("matrix is not unitary (max |U^H U - I| = {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("POVM element {index} is not Hermitian (residual {residual:.3e})")]
    ElementNotHermitian { index: usize, residual: f64 },

    #[error("POVM element {index} is not positive (eigenvalue {min_eigenvalue:.3e})")]
    ElementNotPositive { index: usize, min_eigenvalue: f64 },

    #[error("POVM is not complete: completeness residual {residual:.3e}")]
    NotComplete { residual: f64 },

    #[error("stage {stage} infeasible: contraction value {value} exceeds 1")]
    StageInfeasible { stage: usize, value: f64 },

    #[error("Kraus set violates sum K^H K <= I (largest eigenvalue {max_eigenvalue})")]
    KrausBoundViolated { max_eigenvalue: f64 },

    #[error("map annihilates the input state")]
    ZeroOutcome,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
