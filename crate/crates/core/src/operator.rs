//! Dense operators on the Hilbert space of N spin-1/2 sites.
//!
//! Basis convention: computational basis with σ^z diagonal and σ^x real. Site 1
//! is the leftmost (most significant) Kronecker factor, so basis index bit
//! `N - s` holds the state of site `s` (0 = up, σ^z = +1).

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::spectral::SpectralCache;

pub const MAX_SITES: usize = 12;
pub const MAX_DIM: usize = 1 << MAX_SITES;

/// Relative Hermiticity tolerance: max|M − M†| ≤ HERMITIAN_TOL · max|M|.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace-one tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Lowest eigenvalue a density matrix may have.
pub const PSD_TOL: f64 = -1e-10;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Square complex matrix of dimension 2^N, optionally flagged Hermitian.
///
/// The Hermitian flag is only ever set after verification. Hermitian operators
/// lazily carry their own eigendecomposition, computed on first use and shared
/// by clones; concurrent first uses may both compute it, only one is kept.
#[derive(Clone)]
pub struct QuantumOperator {
    matrix: CMatrix,
    hermitian: bool,
    id: u64,
    spectral: OnceLock<Arc<SpectralCache>>,
}

impl fmt::Debug for QuantumOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantumOperator")
            .field("dim", &self.dim())
            .field("hermitian", &self.hermitian)
            .field("id", &self.id)
            .finish()
    }
}

fn check_dimension(matrix: &CMatrix) -> Result<()> {
    let (r, c) = matrix.shape();
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, found: c });
    }
    if !(2..=MAX_DIM).contains(&r) || !r.is_power_of_two() {
        return Err(Error::InvalidDimension(r));
    }
    Ok(())
}

impl QuantumOperator {
    /// Wraps a general square matrix. The Hermitian flag is left unset.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_dimension(&matrix)?;
        Ok(Self { matrix, hermitian: false, id: fresh_id(), spectral: OnceLock::new() })
    }

    /// Wraps a matrix and verifies max|M − M†| ≤ 1e−12·max|M|.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        check_dimension(&matrix)?;
        let residual = linalg::hermiticity_residual(&matrix);
        if residual > HERMITIAN_TOL * linalg::max_abs(&matrix) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { matrix, hermitian: true, id: fresh_id(), spectral: OnceLock::new() })
    }

    pub fn identity(sites: usize) -> Result<Self> {
        check_sites(sites, 1)?;
        let dim = 1 << sites;
        Self::hermitian(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Identity token of this operator value (shared by clones).
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    /// Eigendecomposition of a Hermitian operator, computed once per value.
    pub fn spectral(&self) -> Result<Arc<SpectralCache>> {
        if !self.hermitian {
            return Err(Error::NotHermitian { residual: linalg::hermiticity_residual(&self.matrix) });
        }
        if let Some(cache) = self.spectral.get() {
            return Ok(Arc::clone(cache));
        }
        let cache = Arc::new(SpectralCache::compute(self)?);
        Ok(Arc::clone(self.spectral.get_or_init(|| cache)))
    }

    pub fn ensure_same_dim(&self, other: &QuantumOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// `self + other`, Hermitian if both inputs are (re-verified).
    pub fn add(&self, other: &QuantumOperator) -> Result<QuantumOperator> {
        self.ensure_same_dim(other)?;
        let sum = &self.matrix + &other.matrix;
        if self.hermitian && other.hermitian {
            QuantumOperator::hermitian(sum)
        } else {
            QuantumOperator::new(sum)
        }
    }

    /// Real multiple; keeps Hermiticity.
    pub fn scale(&self, factor: f64) -> QuantumOperator {
        QuantumOperator {
            matrix: &self.matrix * Complex64::new(factor, 0.0),
            hermitian: self.hermitian,
            id: fresh_id(),
            spectral: OnceLock::new(),
        }
    }

    /// `U · self · U†` for a unitary `u`; used for basis changes.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<QuantumOperator> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let m = linalg::matmul(&linalg::matmul(u, &self.matrix), &u.adjoint());
        if self.hermitian {
            QuantumOperator::hermitian(linalg::hermitian_part(&m))
        } else {
            QuantumOperator::new(m)
        }
    }
}

pub(crate) fn check_sites(sites: usize, min: usize) -> Result<()> {
    if sites < min || sites > MAX_SITES {
        return Err(Error::SiteCount { sites, min, max: MAX_SITES });
    }
    Ok(())
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: QuantumOperator,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e−12), trace (1e−12) and min eigenvalue (≥ −1e−10).
    pub fn new(op: QuantumOperator) -> Result<Self> {
        let op = if op.is_hermitian() { op } else { QuantumOperator::hermitian(op.into_matrix())? };
        let tr = op.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let lowest = op.spectral()?.min_eigenvalue();
        if lowest < PSD_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {lowest:.3e} is negative")));
        }
        Ok(Self { op })
    }

    /// I / 2^N.
    pub fn maximally_mixed(sites: usize) -> Result<Self> {
        check_sites(sites, 1)?;
        let dim = 1 << sites;
        let m = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self::new(QuantumOperator::hermitian(m)?)
    }

    pub fn as_operator(&self) -> &QuantumOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(self.matrix(), self.matrix()).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two_and_non_square() {
        assert!(matches!(QuantumOperator::new(CMatrix::zeros(3, 3)), Err(Error::InvalidDimension(3))));
        assert!(matches!(QuantumOperator::new(CMatrix::zeros(1, 1)), Err(Error::InvalidDimension(1))));
        assert!(matches!(QuantumOperator::new(CMatrix::zeros(2, 4)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hermitian_flag_is_verified() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(QuantumOperator::hermitian(m.clone()).is_err());
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        assert!(QuantumOperator::hermitian(m).unwrap().is_hermitian());
    }

    #[test]
    fn spectral_requires_hermitian_and_is_shared_by_clones() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]));
        assert!(QuantumOperator::new(m.clone()).unwrap().spectral().is_err());
        let h = QuantumOperator::hermitian(m).unwrap();
        let first = h.spectral().unwrap();
        let copy = h.clone();
        assert!(Arc::ptr_eq(&first, &copy.spectral().unwrap()));
        assert_eq!(first.source(), h.id());
    }

    #[test]
    fn density_matrix_validation() {
        let dim = 2;
        let bad_trace = CMatrix::identity(dim, dim);
        assert!(matches!(DensityMatrix::new(QuantumOperator::hermitian(bad_trace).unwrap()), Err(Error::InvalidState(_))));
        let negative = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(QuantumOperator::hermitian(negative).unwrap()), Err(Error::InvalidState(_))));
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        assert!((mixed.purity() - 0.125).abs() < 1e-15);
    }
}
