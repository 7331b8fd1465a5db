//! Eigendecomposition of a Hermitian operator and the propagators built from it.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::QuantumOperator;

/// Accuracy required of V·diag(e)·V† (relative to the spectral radius) and of V·V† − I.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// H = V · diag(e) · V† for a Hermitian H.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    eigenvectors_adjoint: CMatrix,
    source: u64,
}

impl SpectralCache {
    /// Diagonalizes `h` and verifies reconstruction and unitarity.
    pub fn compute(h: &QuantumOperator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian { residual: linalg::hermiticity_residual(h.matrix()) });
        }
        let eig = h.matrix().clone().symmetric_eigen();
        let eigenvalues = eig.eigenvalues;
        let eigenvectors = eig.eigenvectors;
        let eigenvectors_adjoint = eigenvectors.adjoint();
        let dim = h.dim();

        let unitarity = linalg::max_abs_diff(&linalg::matmul(&eigenvectors, &eigenvectors_adjoint), &CMatrix::identity(dim, dim));
        if unitarity > SPECTRAL_TOL {
            return Err(Error::Spectral(format!("eigenvectors deviate from unitarity by {unitarity:.3e}")));
        }
        let radius = eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let scaled = CMatrix::from_fn(dim, dim, |i, j| eigenvectors[(i, j)] * eigenvalues[j]);
        let reconstruction = linalg::max_abs_diff(&linalg::matmul(&scaled, &eigenvectors_adjoint), h.matrix());
        if reconstruction > SPECTRAL_TOL * radius.max(1.0) {
            return Err(Error::Spectral(format!("reconstruction error {reconstruction:.3e}")));
        }

        Ok(Self { eigenvalues, eigenvectors, eigenvectors_adjoint, source: h.id() })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Identity token of the operator this cache was built from.
    pub fn source(&self) -> u64 {
        self.source
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// V† A V.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        linalg::matmul(&linalg::matmul(&self.eigenvectors_adjoint, a), &self.eigenvectors)
    }

    /// V A V†.
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        linalg::matmul(&linalg::matmul(&self.eigenvectors, a), &self.eigenvectors_adjoint)
    }

    /// Phases e^{i e_a t}.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, e * t)).collect()
    }

    /// Heisenberg evolution of an operator already expressed in the eigenbasis:
    /// (e^{iHt} B e^{−iHt})_{ab} = e^{i(e_a − e_b)t} B_{ab}.
    pub fn evolve_in_eigenbasis(&self, b: &CMatrix, t: f64) -> CMatrix {
        if t == 0.0 {
            return b.clone();
        }
        let p = self.phases(t);
        CMatrix::from_fn(b.nrows(), b.ncols(), |i, j| p[i] * b[(i, j)] * p[j].conj())
    }

    /// e^{−iHt} in the original basis.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let p = self.phases(-t);
        let dim = self.dim();
        let scaled = CMatrix::from_fn(dim, dim, |i, j| self.eigenvectors[(i, j)] * p[j]);
        linalg::matmul(&scaled, &self.eigenvectors_adjoint)
    }

    /// V · diag(f(e)) · V†.
    pub fn function_of(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let dim = self.dim();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&e| f(e)).collect();
        let scaled = CMatrix::from_fn(dim, dim, |i, j| self.eigenvectors[(i, j)] * weights[j]);
        linalg::matmul(&scaled, &self.eigenvectors_adjoint)
    }
}

/// e^{iHt} B e^{−iHt}. Returns `b` unchanged at t = 0.
pub fn heisenberg_evolve(b: &QuantumOperator, h: &QuantumOperator, t: f64) -> Result<QuantumOperator> {
    b.ensure_same_dim(h)?;
    let cache = h.spectral()?;
    if t == 0.0 {
        return Ok(b.clone());
    }
    let evolved = cache.from_eigenbasis(&cache.evolve_in_eigenbasis(&cache.to_eigenbasis(b.matrix()), t));
    if b.is_hermitian() {
        QuantumOperator::hermitian(linalg::hermitian_part(&evolved))
    } else {
        QuantumOperator::new(evolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pauli_string, Pauli};

    /// exp(A) by a truncated Taylor series.
    fn taylor_exp(a: &CMatrix, terms: usize) -> CMatrix {
        let n = a.nrows();
        let mut sum = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn t_zero_is_exact_identity() {
        let h = pauli_string(1, &[(1, Pauli::X)]).unwrap();
        let b = pauli_string(1, &[(1, Pauli::Y)]).unwrap();
        let out = heisenberg_evolve(&b, &h, 0.0).unwrap();
        assert_eq!(out.matrix(), b.matrix());
    }

    #[test]
    fn commuting_operator_is_stationary() {
        let z = pauli_string(1, &[(1, Pauli::Z)]).unwrap();
        for t in [0.3, -2.0, 17.5] {
            let out = heisenberg_evolve(&z, &z, t).unwrap();
            assert!(linalg::max_abs_diff(out.matrix(), z.matrix()) < 1e-14);
        }
    }

    #[test]
    fn matches_series_oracle() {
        let h = pauli_string(1, &[(1, Pauli::Z)]).unwrap();
        let b = pauli_string(1, &[(1, Pauli::X)]).unwrap();
        let t = 0.3;
        let forward = taylor_exp(&(h.matrix() * Complex64::new(0.0, t)), 50);
        let backward = taylor_exp(&(h.matrix() * Complex64::new(0.0, -t)), 50);
        let oracle = &forward * b.matrix() * &backward;
        let out = heisenberg_evolve(&b, &h, t).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), &oracle) < 1e-12);
        // closed form: cos(2t) σx − sin(2t) σy
        let y = pauli_string(1, &[(1, Pauli::Y)]).unwrap();
        let closed = b.matrix() * Complex64::new((2.0 * t).cos(), 0.0) - y.matrix() * Complex64::new((2.0 * t).sin(), 0.0);
        assert!(linalg::max_abs_diff(out.matrix(), &closed) < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let h = QuantumOperator::new(m).unwrap();
        let b = pauli_string(1, &[(1, Pauli::X)]).unwrap();
        assert!(matches!(heisenberg_evolve(&b, &h, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn propagator_matches_series() {
        let h = pauli_string(2, &[(1, Pauli::X), (2, Pauli::Z)]).unwrap()
            .add(&pauli_string(2, &[(2, Pauli::Y)]).unwrap()).unwrap();
        let cache = h.spectral().unwrap();
        let oracle = taylor_exp(&(h.matrix() * Complex64::new(0.0, -0.7)), 60);
        assert!(linalg::max_abs_diff(&cache.propagator(0.7), &oracle) < 1e-12);
    }
}
