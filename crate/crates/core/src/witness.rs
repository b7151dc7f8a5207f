//! Entanglement witnesses `W = 1 − A` built from a converged run.
//!
//! `Tr(W ρ) ≥ 0` must hold on every separable `ρ`, and `Tr(W σ) < 0` on the
//! entangled input. Positivity on separables is checked two ways: sampling
//! random separable states, and an alternating minimization over product
//! vectors.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qmatrix::{
    hermitian_eig, partial_contract, tensor_vec, ComplexMatrix, ComplexVector, Dims, Subsystem,
    HERMITIAN_TOL,
};
use crate::ree::{AOperator, ReeResult, Verdict};
use crate::states::{random_separable, DensityMatrix};

/// Separable expectations down to this value still count as non-negative.
pub const WITNESS_TOL: f64 = 1e-6;

/// Default number of random starts for [`min_product_expectation`].
pub const DEFAULT_PRODUCT_RESTARTS: usize = 32;

/// Eigenvalues of `ρ*` below this are treated as outside its support when
/// forming the witness.
pub const WITNESS_SUPPORT_FLOOR: f64 = 1e-10;

const ALTERNATION_TOL: f64 = 1e-12;
const MAX_ALTERNATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct WitnessOperator {
    matrix: ComplexMatrix,
    dims: Dims,
    source_entanglement: f64,
    certifying: bool,
}

impl WitnessOperator {
    /// Wraps a Hermitian operator; `source_entanglement` is informational.
    pub fn new(matrix: ComplexMatrix, dims: Dims, source_entanglement: f64) -> Result<Self> {
        if matrix.dim() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "witness of dim {} for dims {dims}",
                matrix.dim()
            )));
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            dims,
            source_entanglement,
            certifying: true,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn source_entanglement(&self) -> f64 {
        self.source_entanglement
    }

    /// False when built from a run whose verdict was separable; such an
    /// operator detects nothing and is kept only for diagnostics.
    pub fn is_certifying(&self) -> bool {
        self.certifying
    }

    /// `Tr(W ρ)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        self.matrix.trace_product(rho.matrix()).re
    }

    /// `⟨a|⟨b| W |a⟩|b⟩` for normalized `a`, `b`.
    pub fn product_expectation(&self, a: &ComplexVector, b: &ComplexVector) -> f64 {
        self.matrix.expectation(&tensor_vec(a, b)).re
    }
}

/// `W = 1 − A` from the gradient operator at the closest separable state.
///
/// `A` is restricted to the numerical support of `ρ*`. When the minimizer lies
/// on the rank boundary (pure inputs), the near-kernel block of `A` is
/// `σ_nn/λ_n` with both factors at round-off level; its exact limit is zero.
pub fn witness_from_result(res: &ReeResult) -> WitnessOperator {
    let a = support_restricted(&res.a_operator);
    let w = &ComplexMatrix::identity(a.dim()) - &a;
    WitnessOperator {
        matrix: w.hermitian_part(),
        dims: res.closest_separable.dims(),
        source_entanglement: res.entanglement,
        certifying: res.verdict == Verdict::Entangled,
    }
}

fn support_restricted(a: &AOperator) -> ComplexMatrix {
    let basis = a.basis();
    let kernel: Vec<bool> = basis
        .eigenvalues
        .iter()
        .map(|&l| l < WITNESS_SUPPORT_FLOOR)
        .collect();
    if !kernel.contains(&true) {
        return a.matrix().clone();
    }
    let mut m = basis.to_eigenbasis(a.matrix());
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if kernel[i] || kernel[j] {
                m[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    basis.from_eigenbasis(&m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableCheck {
    pub min_expectation: f64,
    /// Random states plus computational-basis product states.
    pub states_checked: usize,
    pub passed: bool,
}

fn sample_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_add(i.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Minimum of `Tr(W ρ)` over `n_samples` random separable states and every
/// computational-basis product state; passes iff the minimum is at least `−WITNESS_TOL`.
pub fn verify_on_separables(
    w: &WitnessOperator,
    n_samples: usize,
    seed: u64,
) -> Result<SeparableCheck> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
    }
    let Dims { d1, d2 } = w.dims;
    let mut min = f64::INFINITY;
    for i in 0..d1 * d2 {
        min = min.min(w.matrix[(i, i)].re);
    }
    for i in 0..n_samples as u64 {
        let rho = random_separable(w.dims, sample_seed(seed, i))?;
        min = min.min(w.expectation(&rho));
    }
    Ok(SeparableCheck {
        min_expectation: min,
        states_checked: n_samples + d1 * d2,
        passed: min >= -WITNESS_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductMinimum {
    pub value: f64,
    pub a: ComplexVector,
    pub b: ComplexVector,
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let norm = v.norm();
    v.unscale(norm)
}

/// Lowest eigenpair of the reduced operator on `acts_on` with the other factor fixed.
fn best_response(
    w: &ComplexMatrix,
    dims: Dims,
    acts_on: Subsystem,
    fixed: &ComplexVector,
) -> Result<(f64, ComplexVector)> {
    let reduced = partial_contract(w, dims, acts_on, fixed).hermitian_part();
    let eig = hermitian_eig(&reduced)?;
    Ok((eig.min_eigenvalue(), eig.eigenvector(0)))
}

/// Heuristic minimum of `⟨a|⟨b| W |a⟩|b⟩` over unit product vectors.
///
/// Alternates exact minimizations over `a` (for fixed `b`) and `b` (for fixed
/// `a`) until the value changes by less than `1e-12`, keeping the best of
/// `restarts` random starts. Each half-update cannot increase the value.
pub fn min_product_expectation(
    w: &WitnessOperator,
    restarts: usize,
    seed: u64,
) -> Result<ProductMinimum> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    let dims = w.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<ProductMinimum> = None;
    for _ in 0..restarts {
        let mut b = random_unit(&mut rng, dims.d2);
        let (mut value, mut a) = best_response(&w.matrix, dims, Subsystem::First, &b)?;
        for _ in 0..MAX_ALTERNATIONS {
            let (vb, nb) = best_response(&w.matrix, dims, Subsystem::Second, &a)?;
            b = nb;
            let (va, na) = best_response(&w.matrix, dims, Subsystem::First, &b)?;
            a = na;
            let change = value - va.min(vb);
            value = va;
            if change.abs() < ALTERNATION_TOL {
                break;
            }
        }
        if best.as_ref().is_none_or(|p| value < p.value) {
            best = Some(ProductMinimum { value, a, b });
        }
    }
    Ok(best.expect("restarts >= 1"))
}
