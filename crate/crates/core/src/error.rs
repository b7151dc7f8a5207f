use thiserror::Error;

/// Errors produced by the linear algebra, state construction and iteration layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |H - H†| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    DecompositionFailure { dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("product ensemble has total trace {trace:e}")]
    ZeroEnsemble { trace: f64 },

    #[error("random ensemble stayed rank deficient after {attempts} draws")]
    DegenerateDraw { attempts: usize },

    #[error("no NPT state found after {attempts} rejections")]
    SamplingExhausted { attempts: usize },

    #[error("reference state is rank deficient (min eigenvalue {min_eigenvalue:e})")]
    RankDeficientReference { min_eigenvalue: f64 },

    #[error("ensemble term {term} has a zero vector")]
    ZeroVector { term: usize },

    #[error("induced separable state lost full rank after {restarts} restarts")]
    RankCollapse { restarts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
