//! Relative entropy of entanglement for finite-dimensional bipartite states.
//!
//! [`ree::iterate`] minimizes `S(σ‖ρ)` over separable `ρ`, returning the
//! closest separable state, a separability verdict and the gradient operator
//! from which [`witness::witness_from_result`] builds an entanglement witness.

pub mod error;
pub mod qmatrix;
pub mod ree;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use qmatrix::{
    hermitian_eig, partial_trace, partial_transpose, quantum_relative_entropy, tensor_product,
    von_neumann_entropy, ComplexMatrix, ComplexVector, Dims, HermitianEigensystem, Subsystem,
};
pub use ree::{
    build_a_operator, directional_derivative, half_step, iterate, precision_digits, r_operator,
    AOperator, ConvergenceTrace, IterationConfig, IterationRecord, ReeResult, Termination, Verdict,
};
pub use states::{
    ensemble_to_state, flip_operator, is_ppt, random_npt, random_product_ensemble, random_pure,
    random_separable, random_unitary, werner_reference_entanglement, werner_relative_entropy,
    werner_state, DensityMatrix, ProductEnsemble, WernerParameter,
};
pub use witness::{
    min_product_expectation, verify_on_separables, witness_from_result, ProductMinimum,
    SeparableCheck, WitnessOperator, DEFAULT_PRODUCT_RESTARTS, WITNESS_TOL,
};
