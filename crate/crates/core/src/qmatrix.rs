//! Dense complex linear algebra for bipartite operators.
//!
//! Composite indices follow the row-major convention `i = i1 * d2 + i2`:
//! subsystem 1 is the slow index.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::DensityMatrix;

/// Eigenvalues below this floor are treated as exact zeros when taking logarithms.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// Max-abs tolerance on `H - H†` accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Magnitude below which negative entropies are rounding noise and clamped to zero.
pub const NEGATIVE_ENTROPY_CLAMP: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_SWEEPS: usize = 10_000;

pub type ComplexVector = DVector<Complex64>;

/// Local dimensions of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub d1: usize,
    pub d2: usize,
}

impl Dims {
    pub fn new(d1: usize, d2: usize) -> Self {
        Self { d1, d2 }
    }

    /// Total dimension `d1 * d2`.
    pub fn total(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn local(&self, which: Subsystem) -> usize {
        match which {
            Subsystem::First => self.d1,
            Subsystem::Second => self.d2,
        }
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 || m.dim() != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dim {} does not factor as {}x{}",
                m.dim(),
                self.d1,
                self.d2
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊗{}", self.d1, self.d2)
    }
}

/// One factor of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::First => Subsystem::Second,
            Subsystem::Second => Subsystem::First,
        }
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Builds a matrix from row-major rows; fails unless the rows form a square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "rows do not form a non-empty square matrix".into(),
            ));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// `|v⟩⟨v|`
    pub fn outer(v: &ComplexVector) -> Self {
        Self(v * v.adjoint())
    }

    /// Wraps an nalgebra matrix, which must be square and non-empty.
    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs entry of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(M + M†) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).scale(0.5))
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        &self.0 * v
    }

    /// `⟨v|M|v⟩`
    pub fn expectation(&self, v: &ComplexVector) -> Complex64 {
        v.dotc(&(&self.0 * v))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `n` is the eigenvector for `eigenvalues[n]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn eigenvector(&self, n: usize) -> ComplexVector {
        self.eigenvectors.0.column(n).into_owned()
    }

    /// `V · diag(f(λ)) · V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        let mut scaled = v.clone();
        for (n, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(n).scale_mut(fl);
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }

    /// `V† M V`: `m` expressed in this eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        ComplexMatrix(v.adjoint() * &m.0 * v)
    }

    /// `V M V†`: inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        ComplexMatrix(v * &m.0 * v.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigensystem> {
    let deviation = h.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitian { deviation });
    }
    let dim = h.dim();
    let eig = h
        .hermitian_part()
        .0
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_SWEEPS)
        .ok_or(Error::DecompositionFailure { dim })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigensystem {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    })
}

/// Kronecker product with row-major composite indexing.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of two vectors.
pub fn tensor_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Reduced operator on the `keep` subsystem.
pub fn partial_trace(m: &ComplexMatrix, dims: Dims, keep: Subsystem) -> Result<ComplexMatrix> {
    dims.check(m)?;
    let Dims { d1, d2 } = dims;
    let out = match keep {
        Subsystem::First => ComplexMatrix::from_fn(d1, |i, j| {
            (0..d2).map(|a| m.0[(i * d2 + a, j * d2 + a)]).sum()
        }),
        Subsystem::Second => ComplexMatrix::from_fn(d2, |i, j| {
            (0..d1).map(|a| m.0[(a * d2 + i, a * d2 + j)]).sum()
        }),
    };
    Ok(out)
}

/// Transpose on one tensor factor only.
pub fn partial_transpose(m: &ComplexMatrix, dims: Dims, which: Subsystem) -> Result<ComplexMatrix> {
    dims.check(m)?;
    let d2 = dims.d2;
    let out = ComplexMatrix::from_fn(dims.total(), |r, c| {
        let (i1, i2) = (r / d2, r % d2);
        let (j1, j2) = (c / d2, c % d2);
        match which {
            Subsystem::First => m.0[(j1 * d2 + i2, i1 * d2 + j2)],
            Subsystem::Second => m.0[(i1 * d2 + j2, j1 * d2 + i2)],
        }
    });
    Ok(out)
}

/// `Tr_other(A (1 ⊗ |v⟩⟨v|))` (or with the factors swapped): contracts `a`
/// with `v` on the subsystem opposite `acts_on`, leaving an operator on `acts_on`.
pub fn partial_contract(
    a: &ComplexMatrix,
    dims: Dims,
    acts_on: Subsystem,
    v: &ComplexVector,
) -> ComplexMatrix {
    let Dims { d1, d2 } = dims;
    match acts_on {
        Subsystem::First => {
            let mut r = ComplexMatrix::zeros(d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..d2 {
                        let vx = v[x].conj();
                        for y in 0..d2 {
                            acc += vx * a[(i * d2 + x, j * d2 + y)] * v[y];
                        }
                    }
                    r[(i, j)] = acc;
                }
            }
            r
        }
        Subsystem::Second => {
            let mut r = ComplexMatrix::zeros(d2);
            for x in 0..d2 {
                for y in 0..d2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..d1 {
                        let ui = v[i].conj();
                        for j in 0..d1 {
                            acc += ui * a[(i * d2 + x, j * d2 + y)] * v[j];
                        }
                    }
                    r[(x, y)] = acc;
                }
            }
            r
        }
    }
}

/// `Tr(σ ln σ)`, with `0 ln 0 = 0`.
pub(crate) fn negentropy(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&l| l > SUPPORT_FLOOR)
        .map(|&l| l * l.ln())
        .sum()
}

/// `S(σ‖ρ)` from `Tr σ ln σ` and the eigensystem of `ρ`.
pub(crate) fn relative_entropy_from_parts(
    sigma: &ComplexMatrix,
    sigma_negentropy: f64,
    rho_eig: &HermitianEigensystem,
) -> f64 {
    let v = &rho_eig.eigenvectors.0;
    let mut cross = 0.0;
    for (n, &lambda) in rho_eig.eigenvalues.iter().enumerate() {
        let col = v.column(n);
        let weight = col.dotc(&(&sigma.0 * col)).re;
        if lambda > SUPPORT_FLOOR {
            cross += weight * lambda.ln();
        } else if weight > SUPPORT_FLOOR {
            return f64::INFINITY;
        }
    }
    clamp_entropy(sigma_negentropy - cross)
}

fn clamp_entropy(s: f64) -> f64 {
    if s < 0.0 && s > -NEGATIVE_ENTROPY_CLAMP {
        0.0
    } else {
        s
    }
}

/// Quantum relative entropy `S(σ‖ρ) = Tr(σ ln σ − σ ln ρ)` in nats.
///
/// Returns `f64::INFINITY` when the support of `sigma` leaves the support of `rho`.
pub fn quantum_relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy between dims {} and {}",
            sigma.dim(),
            rho.dim()
        )));
    }
    let sigma_eig = hermitian_eig(sigma.matrix())?;
    let rho_eig = hermitian_eig(rho.matrix())?;
    Ok(relative_entropy_from_parts(
        sigma.matrix(),
        negentropy(&sigma_eig.eigenvalues),
        &rho_eig,
    ))
}

/// Von Neumann entropy `−Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = hermitian_eig(rho.matrix())?;
    Ok(clamp_entropy(-negentropy(&eig.eigenvalues)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n).hermitian_part()
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let h = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&h).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for (got, want) in e.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // eigenvector of 1 is e_1, of 2 is e_2, of 3 is e_0
        for (n, basis) in [1usize, 2, 0].into_iter().enumerate() {
            assert!((e.eigenvectors[(basis, n)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_pauli_x() {
        let h = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
            .unwrap();
        let e = hermitian_eig(&h).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvector(0);
        // (1, -1)/√2 up to phase
        assert!((v0[0].norm() - s).abs() < 1e-12);
        assert!(((v0[0] + v0[1]).norm()) < 1e-12);
        let v1 = e.eigenvector(1);
        assert!(((v1[0] - v1[1]).norm()) < 1e-12);
    }

    #[test]
    fn eig_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 2, 8, 16, 33, 64] {
            let h = random_hermitian(&mut rng, n);
            let e = hermitian_eig(&h).unwrap();
            let resid = (&e.reconstruct() - &h).frobenius_norm();
            assert!(resid <= 1e-10 * h.frobenius_norm(), "n={n} resid={resid}");
            let vtv = &e.eigenvectors.adjoint() * &e.eigenvectors;
            let ortho = (&vtv - &ComplexMatrix::identity(n)).frobenius_norm();
            assert!(ortho <= 1e-10, "n={n} ortho={ortho}");
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]])
            .unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn tensor_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(
            tensor_product(&a, &b),
            ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn tensor_trace_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 3);
        let ab = tensor_product(&a, &b);
        assert_eq!(ab.dim(), 9);
        // direct element-wise trace over composite index
        let mut direct = c(0.0, 0.0);
        for i1 in 0..3 {
            for i2 in 0..3 {
                direct += a[(i1, i1)] * b[(i2, i2)];
            }
        }
        assert!((ab.trace() - direct).norm() < 1e-12);
        assert!((ab.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let dims = Dims::new(2, 2);
        let p00 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let r = partial_trace(&p00, dims, Subsystem::First).unwrap();
        assert_eq!(r, ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexVector::from_vec(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]);
        let r = partial_trace(&ComplexMatrix::outer(&bell), dims, Subsystem::Second).unwrap();
        assert!((&r - &ComplexMatrix::identity(2).scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 2);
        let ab = tensor_product(&a, &b);
        let dims = Dims::new(3, 2);
        let ra = partial_trace(&ab, dims, Subsystem::First).unwrap();
        assert!((&ra - &a.scale_complex(b.trace())).max_abs() < 1e-12);
        let rb = partial_trace(&ab, dims, Subsystem::Second).unwrap();
        assert!((&rb - &b.scale_complex(a.trace())).max_abs() < 1e-12);
        assert!((ra.trace() - ab.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(
            partial_trace(&m, Dims::new(2, 2), Subsystem::First),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_transpose(&m, Dims::new(2, 3), Subsystem::Second).is_err());
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(&mut rng, 2);
        let b = random_matrix(&mut rng, 3);
        let dims = Dims::new(2, 3);
        let ab = tensor_product(&a, &b);
        let pt2 = partial_transpose(&ab, dims, Subsystem::Second).unwrap();
        assert!((&pt2 - &tensor_product(&a, &b.transpose())).max_abs() < 1e-14);
        let pt1 = partial_transpose(&ab, dims, Subsystem::First).unwrap();
        assert!((&pt1 - &tensor_product(&a.transpose(), &b)).max_abs() < 1e-14);
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = ComplexVector::from_vec(vec![c(0., 0.), c(s, 0.), c(-s, 0.), c(0., 0.)]);
        let pt = partial_transpose(
            &ComplexMatrix::outer(&singlet),
            Dims::new(2, 2),
            Subsystem::Second,
        )
        .unwrap();
        let e = hermitian_eig(&pt).unwrap();
        assert!((e.min_eigenvalue() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn map_spectrum_log_matches_definition() {
        let h = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        let l = hermitian_eig(&h).unwrap().map_spectrum(f64::ln);
        assert!((l[(0, 0)].re - 0.25f64.ln()).abs() < 1e-14);
        assert!((l[(1, 1)].re - 0.75f64.ln()).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
                ComplexMatrix::from_fn(n, |i, j| c(v[i * n + j].0, v[i * n + j].1))
            })
        }

        proptest! {
            #[test]
            fn partial_transpose_is_involutive(m in arb_matrix(6), first in any::<bool>()) {
                let dims = Dims::new(2, 3);
                let which = if first { Subsystem::First } else { Subsystem::Second };
                let twice = partial_transpose(&partial_transpose(&m, dims, which).unwrap(), dims, which).unwrap();
                prop_assert_eq!(twice, m);
            }

            #[test]
            fn partial_trace_preserves_trace(m in arb_matrix(6)) {
                let dims = Dims::new(3, 2);
                for keep in [Subsystem::First, Subsystem::Second] {
                    let r = partial_trace(&m, dims, keep).unwrap();
                    prop_assert!((r.trace() - m.trace()).norm() <= 1e-12);
                }
            }
        }
    }
}
