//! Density matrices, product ensembles and deterministic test-state generators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qmatrix::{
    hermitian_eig, partial_transpose, tensor_vec, ComplexMatrix, ComplexVector, Dims, Subsystem,
};

/// Tolerance on Hermiticity, positivity and unit trace of a [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-8;

/// Minimum eigenvalue a random ensemble's induced state must exceed to count as full rank.
pub const FULL_RANK_FLOOR: f64 = 1e-9;

/// Redraws allowed for [`random_product_ensemble`] before giving up.
pub const MAX_REGENERATIONS: usize = 10;

/// Rejections allowed for [`random_npt`].
pub const MAX_NPT_REJECTIONS: usize = 10_000;

/// Partial-transpose eigenvalue below which [`random_npt`] accepts a draw.
pub const NPT_MARGIN: f64 = 1e-6;

const ZERO_TRACE: f64 = 1e-14;

/// Hermitian, positive semidefinite, unit-trace operator on a bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Dims,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants at [`STATE_TOL`].
    pub fn new(matrix: ComplexMatrix, dims: Dims) -> Result<Self> {
        Self::with_tolerance(matrix, dims, STATE_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, dims: Dims, tol: f64) -> Result<Self> {
        if dims.d1 == 0 || dims.d2 == 0 || matrix.dim() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dim {} for dims {dims}",
                matrix.dim()
            )));
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |M - M†| = {deviation:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eig(&matrix)?.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Normalizes a positive semidefinite operator to unit trace; positivity is trusted.
    pub(crate) fn from_psd_unnormalized(matrix: ComplexMatrix, dims: Dims) -> Result<Self> {
        let tr = matrix.trace().re;
        if tr < ZERO_TRACE {
            return Err(Error::ZeroEnsemble { trace: tr });
        }
        Ok(Self {
            matrix: matrix.hermitian_part().scale(1.0 / tr),
            dims,
        })
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(psi: &ComplexVector, dims: Dims) -> Result<Self> {
        if psi.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for dims {dims}",
                psi.len()
            )));
        }
        Self::from_psd_unnormalized(ComplexMatrix::outer(psi), dims)
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let p = dims.total();
        Self {
            matrix: ComplexMatrix::identity(p).scale(1.0 / p as f64),
            dims,
        }
    }

    /// `|Ψ−⟩⟨Ψ−|` on 2⊗2.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = ComplexVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        Self::pure(&psi, Dims::new(2, 2)).expect("singlet is a valid state")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Conjugation `U ρ U†` by a unitary.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch("unitary dimension".into()));
        }
        Self::from_psd_unnormalized(&(u * &self.matrix) * &u.adjoint(), self.dims)
    }
}

/// Separable state written as `Σ_k |φ_k¹⟩⟨φ_k¹| ⊗ |φ_k²⟩⟨φ_k²|` with unnormalized vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductEnsemble {
    dims: Dims,
    terms: Vec<(ComplexVector, ComplexVector)>,
}

impl ProductEnsemble {
    pub fn new(dims: Dims, terms: Vec<(ComplexVector, ComplexVector)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::ZeroEnsemble { trace: 0.0 });
        }
        for (k, (a, b)) in terms.iter().enumerate() {
            if a.len() != dims.d1 || b.len() != dims.d2 {
                return Err(Error::DimensionMismatch(format!(
                    "term {k} has vector lengths ({}, {}) for dims {dims}",
                    a.len(),
                    b.len()
                )));
            }
            if a.norm() == 0.0 && b.norm() == 0.0 {
                return Err(Error::ZeroVector { term: k });
            }
        }
        Ok(Self { dims, terms })
    }

    /// Default ensemble size `(d1·d2)²`.
    pub fn default_size(dims: Dims) -> usize {
        dims.total() * dims.total()
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(ComplexVector, ComplexVector)] {
        &self.terms
    }

    pub(crate) fn terms_mut(&mut self) -> &mut [(ComplexVector, ComplexVector)] {
        &mut self.terms
    }

    pub fn vector(&self, k: usize, which: Subsystem) -> &ComplexVector {
        match which {
            Subsystem::First => &self.terms[k].0,
            Subsystem::Second => &self.terms[k].1,
        }
    }

    /// Term weights `‖φ_k¹‖²‖φ_k²‖²`; they sum to the trace of the induced state.
    pub fn weights(&self) -> Vec<f64> {
        self.terms
            .iter()
            .map(|(a, b)| a.norm_squared() * b.norm_squared())
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Rescales every vector so the induced state has unit trace.
    pub fn normalize(&mut self) -> Result<()> {
        let total = self.total_weight();
        if !total.is_finite() || total < ZERO_TRACE {
            return Err(Error::ZeroEnsemble { trace: total });
        }
        let s = total.powf(-0.25);
        for (a, b) in &mut self.terms {
            a.scale_mut(s);
            b.scale_mut(s);
        }
        Ok(())
    }

    /// Unit-trace rescaling applied to one subsystem's vectors only.
    pub fn normalize_on(&mut self, which: Subsystem) -> Result<()> {
        let total = self.total_weight();
        if !total.is_finite() || total < ZERO_TRACE {
            return Err(Error::ZeroEnsemble { trace: total });
        }
        let s = total.powf(-0.5);
        for (a, b) in &mut self.terms {
            match which {
                Subsystem::First => a.scale_mut(s),
                Subsystem::Second => b.scale_mut(s),
            }
        }
        Ok(())
    }

    /// Unnormalized `Σ_k |φ_k¹φ_k²⟩⟨φ_k¹φ_k²|`, assembled as `Φ Φ†`.
    pub(crate) fn induced_operator(&self) -> ComplexMatrix {
        let p = self.dims.total();
        let mut phi = DMatrix::<Complex64>::zeros(p, self.terms.len());
        for (k, (a, b)) in self.terms.iter().enumerate() {
            phi.set_column(k, &tensor_vec(a, b));
        }
        let rho = &phi * phi.adjoint();
        ComplexMatrix::from_nalgebra(rho).expect("square by construction")
    }

    /// Product states `|i⟩|j⟩` of the computational basis, each with weight `1/p`.
    pub fn computational_basis(dims: Dims) -> Self {
        let amp = Complex64::new((dims.total() as f64).powf(-0.25), 0.0);
        let mut terms = Vec::with_capacity(dims.total());
        for i in 0..dims.d1 {
            for j in 0..dims.d2 {
                let mut a = ComplexVector::zeros(dims.d1);
                let mut b = ComplexVector::zeros(dims.d2);
                a[i] = amp;
                b[j] = amp;
                terms.push((a, b));
            }
        }
        Self { dims, terms }
    }

    /// Convex mixture `t·self + (1−t)·other` at the level of induced states.
    pub fn mix(&self, t: f64, other: &ProductEnsemble) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(
                "ensembles over different dims".into(),
            ));
        }
        let (ws, wo) = (self.total_weight(), other.total_weight());
        let scale = |v: &ComplexVector, s: f64| v.scale(s.powf(0.25));
        let mut terms = Vec::with_capacity(self.len() + other.len());
        for (a, b) in &self.terms {
            terms.push((scale(a, t / ws), scale(b, t / ws)));
        }
        for (a, b) in &other.terms {
            terms.push((scale(a, (1.0 - t) / wo), scale(b, (1.0 - t) / wo)));
        }
        Self::new(self.dims, terms)
    }
}

/// Normalized separable state induced by a product ensemble.
pub fn ensemble_to_state(e: &ProductEnsemble) -> Result<DensityMatrix> {
    DensityMatrix::from_psd_unnormalized(e.induced_operator(), e.dims())
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

/// Random product ensemble with complex Gaussian vectors, normalized to unit trace.
///
/// When `k ≥ d1·d2` the induced state is checked to be full rank and redrawn
/// (continuing the same random stream) if it is not.
pub fn random_product_ensemble(dims: Dims, k: usize, seed: u64) -> Result<ProductEnsemble> {
    if k == 0 {
        return Err(Error::InvalidConfig(
            "ensemble size must be at least 1".into(),
        ));
    }
    if dims.d1 == 0 || dims.d2 == 0 {
        return Err(Error::DimensionMismatch(format!("dims {dims}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let needs_full_rank = k >= dims.total();
    for _ in 0..=MAX_REGENERATIONS {
        let terms = (0..k)
            .map(|_| {
                (
                    gaussian_vector(&mut rng, dims.d1),
                    gaussian_vector(&mut rng, dims.d2),
                )
            })
            .collect();
        let mut e = ProductEnsemble::new(dims, terms)?;
        e.normalize()?;
        if !needs_full_rank {
            return Ok(e);
        }
        let min = hermitian_eig(&e.induced_operator())?.min_eigenvalue();
        if min > FULL_RANK_FLOOR {
            return Ok(e);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_REGENERATIONS,
    })
}

/// Random separable state: the induced state of a default-size random ensemble.
pub fn random_separable(dims: Dims, seed: u64) -> Result<DensityMatrix> {
    ensemble_to_state(&random_product_ensemble(
        dims,
        ProductEnsemble::default_size(dims),
        seed,
    )?)
}

/// Haar-random pure state on the full bipartite space.
pub fn random_pure(dims: Dims, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DensityMatrix::pure(&gaussian_vector(&mut rng, dims.total()), dims)
}

/// Random entangled state certified by a negative partial transpose.
///
/// Draws `G G† / Tr` with complex Gaussian `G` until the partial transpose has
/// an eigenvalue below `-NPT_MARGIN`.
pub fn random_npt(dims: Dims, seed: u64) -> Result<DensityMatrix> {
    let p = dims.total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_NPT_REJECTIONS {
        let cols: Vec<ComplexVector> = (0..p).map(|_| gaussian_vector(&mut rng, p)).collect();
        let g = ComplexMatrix::from_fn(p, |i, j| cols[j][i]);
        let rho = DensityMatrix::from_psd_unnormalized(&g * &g.adjoint(), dims)?;
        if min_partial_transpose_eigenvalue(&rho)? < -NPT_MARGIN {
            return Ok(rho);
        }
    }
    Err(Error::SamplingExhausted {
        attempts: MAX_NPT_REJECTIONS,
    })
}

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<ComplexVector> = (0..d).map(|_| gaussian_vector(&mut rng, d)).collect();
    let g = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the column phases so the distribution is Haar
    let q = DMatrix::from_fn(d, d, |i, j| {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q[(i, j)] * phase
    });
    ComplexMatrix::from_nalgebra(q).expect("square")
}

/// Smallest eigenvalue of `ρ^{T₂}`.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::Second)?;
    Ok(hermitian_eig(&pt)?.min_eigenvalue())
}

/// Positive-partial-transpose test: `λ_min(ρ^{T₂}) ≥ −tol`.
pub fn is_ppt(rho: &DensityMatrix, tol: f64) -> Result<bool> {
    Ok(min_partial_transpose_eigenvalue(rho)? >= -tol)
}

/// Swap operator on `d⊗d`: `F|i⟩|j⟩ = |j⟩|i⟩`.
pub fn flip_operator(d: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = Complex64::new(1.0, 0.0);
        }
    }
    f
}

/// Werner family parameter: local dimension `d` and flip expectation `f ∈ [−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParameter {
    d: usize,
    f: f64,
}

impl WernerParameter {
    pub fn new(d: usize, f: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidConfig(format!(
                "Werner local dimension must be at least 2, got {d}"
            )));
        }
        if !(-1.0..=1.0).contains(&f) {
            return Err(Error::InvalidConfig(format!(
                "Werner parameter f = {f} outside [-1, 1]"
            )));
        }
        Ok(Self { d, f })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn f(&self) -> f64 {
        self.f
    }
}

/// `ρ_w = (d − f)/(d(d² − 1)) · 1 + (fd − 1)/(d(d² − 1)) · F`
pub fn werner_state(p: WernerParameter) -> DensityMatrix {
    let (d, f) = (p.d, p.f);
    let df = d as f64;
    let norm = df * (df * df - 1.0);
    let a = (df - f) / norm;
    let b = (f * df - 1.0) / norm;
    let m = &ComplexMatrix::identity(d * d).scale(a) + &flip_operator(d).scale(b);
    DensityMatrix {
        matrix: m,
        dims: Dims::new(d, d),
    }
}

/// `S(ρ_w(f) ‖ ρ_w(g))`, using that both states are diagonal in the
/// symmetric/antisymmetric split with weights `(1 ± f)/2`.
pub fn werner_relative_entropy(f: f64, g: f64) -> f64 {
    let term = |p: f64, q: f64| {
        if p <= 0.0 {
            0.0
        } else if q <= 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    };
    term((1.0 + f) / 2.0, (1.0 + g) / 2.0) + term((1.0 - f) / 2.0, (1.0 - g) / 2.0)
}

/// Relative entropy of entanglement of a Werner state.
///
/// Werner-twirling maps the closest separable state into the family, and the
/// separable members are exactly `g ≥ 0`, so this is a one-dimensional
/// minimization over `g ∈ [0, 1]` (coarse scan, then golden section).
pub fn werner_reference_entanglement(p: WernerParameter) -> f64 {
    let f = p.f;
    let objective = |g: f64| werner_relative_entropy(f, g);
    let n = 1000;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = objective(i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = (best_i.saturating_sub(1)) as f64 / n as f64;
    let hi = ((best_i + 1).min(n)) as f64 / n as f64;
    let g = golden_section_min(objective, lo, hi, 1e-12);
    objective(g).min(best).max(0.0)
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
