//! Random systems with a known C, T or S symmetry, built so that the
//! symmetry holds by construction rather than by numerical accident.

#![allow(dead_code)]

use num_complex::Complex64;
use qnslab::linalg::{self, CMatrix};
use qnslab::model::{pauli_string, Pauli};
use qnslab::random::{self, Rng64};
use qnslab::symmetry::{SymmetryKind, SymmetryTransform};
use qnslab::{DensityMatrix, QuantumOperator};
use rand::Rng;

/// Hermitian with largest |eigenvalue| equal to 1.
pub fn unit_hermitian(m: CMatrix) -> QuantumOperator {
    let op = QuantumOperator::hermitian(linalg::hermitian_part(&m)).unwrap();
    let spec = op.spectral().unwrap();
    let norm = spec.eigenvalues().iter().fold(0.0f64, |a, e| a.max(e.abs()));
    op.scale(1.0 / norm)
}

pub fn random_unit_hermitian(rng: &mut Rng64, dim: usize) -> QuantumOperator {
    unit_hermitian(random::ginibre(rng, dim))
}

/// Real symmetric: invariant under transpose and under complex conjugation.
pub fn real_symmetric(rng: &mut Rng64, dim: usize) -> QuantumOperator {
    let g = random::ginibre(rng, dim).map(|z| Complex64::new(z.re, 0.0));
    unit_hermitian(&g + g.transpose())
}

/// i·(real antisymmetric): odd under transpose and under complex conjugation.
pub fn imaginary_antisymmetric(rng: &mut Rng64, dim: usize) -> QuantumOperator {
    let g = random::ginibre(rng, dim).map(|z| Complex64::new(0.0, z.re));
    unit_hermitian(&g - g.transpose())
}

/// Normalized e^{−f(H)}; f must be bounded below by something modest.
pub fn spectral_state(h: &QuantumOperator, f: impl Fn(f64) -> f64) -> DensityMatrix {
    let m = h.spectral().unwrap().function_of(|e| (-f(e)).exp());
    let tr = linalg::trace(&m).re;
    DensityMatrix::new(QuantumOperator::hermitian(linalg::hermitian_part(&(m / Complex64::new(tr, 0.0)))).unwrap()).unwrap()
}

/// A system with a definite-parity pool of observables.
pub struct SymmetricSystem {
    pub hamiltonian: QuantumOperator,
    pub state: DensityMatrix,
    pub transform: SymmetryTransform,
    /// Observables with parity +1 and −1 respectively.
    pub even: Vec<QuantumOperator>,
    pub odd: Vec<QuantumOperator>,
}

/// 𝓜 = I with H imaginary antisymmetric (H^T = −H) and ρ real symmetric.
/// The state need not be stationary.
pub fn c_symmetric(rng: &mut Rng64, sites: usize) -> SymmetricSystem {
    let dim = 1 << sites;
    let hamiltonian = imaginary_antisymmetric(rng, dim);
    let g = random::ginibre(rng, dim).map(|z| Complex64::new(z.re, 0.0));
    let gg = linalg::matmul(&g, &g.transpose());
    let tr = linalg::trace(&gg).re;
    let state = DensityMatrix::new(QuantumOperator::hermitian(linalg::hermitian_part(&(gg / Complex64::new(tr, 0.0)))).unwrap()).unwrap();
    let transform = SymmetryTransform::new(SymmetryKind::C, CMatrix::identity(dim, dim)).unwrap();
    SymmetricSystem {
        hamiltonian,
        state,
        transform,
        even: (0..3).map(|_| real_symmetric(rng, dim)).collect(),
        odd: (0..3).map(|_| imaginary_antisymmetric(rng, dim)).collect(),
    }
}

/// 𝓜 = I with H real symmetric and a thermal state.
pub fn t_symmetric(rng: &mut Rng64, sites: usize) -> SymmetricSystem {
    let dim = 1 << sites;
    let hamiltonian = real_symmetric(rng, dim);
    let beta = rng.random_range(0.0..3.0);
    let state = qnslab::model::thermal_state(&hamiltonian, beta).unwrap();
    let transform = SymmetryTransform::new(SymmetryKind::T, CMatrix::identity(dim, dim)).unwrap();
    SymmetricSystem {
        hamiltonian,
        state,
        transform,
        even: (0..3).map(|_| real_symmetric(rng, dim)).collect(),
        odd: (0..3).map(|_| imaginary_antisymmetric(rng, dim)).collect(),
    }
}

/// 𝓜 = σ^z on site 1 (block diagonal ±1). H is off-diagonal in blocks, ρ a
/// function of H² and observables are block diagonal (even) or off-diagonal
/// (odd).
pub fn s_symmetric(rng: &mut Rng64, sites: usize) -> SymmetricSystem {
    let dim = 1 << sites;
    let half = dim / 2;
    let block_parity = |i: usize, j: usize| (i < half) == (j < half);
    let off = |m: CMatrix| CMatrix::from_fn(dim, dim, |i, j| if block_parity(i, j) { Complex64::new(0.0, 0.0) } else { m[(i, j)] });
    let diag = |m: CMatrix| CMatrix::from_fn(dim, dim, |i, j| if block_parity(i, j) { m[(i, j)] } else { Complex64::new(0.0, 0.0) });
    let hamiltonian = unit_hermitian(off(linalg::hermitian_part(&random::ginibre(rng, dim))));
    let beta = rng.random_range(0.0..2.0);
    let state = spectral_state(&hamiltonian, |e| beta * e * e);
    let transform = SymmetryTransform::new(SymmetryKind::S, pauli_string(sites, &[(1, Pauli::Z)]).unwrap().into_matrix()).unwrap();
    SymmetricSystem {
        hamiltonian,
        state,
        transform,
        even: (0..3).map(|_| unit_hermitian(diag(linalg::hermitian_part(&random::ginibre(rng, dim))))).collect(),
        odd: (0..3).map(|_| unit_hermitian(off(linalg::hermitian_part(&random::ginibre(rng, dim))))).collect(),
    }
}

/// Picks n observables from the pool, returning labels, the set and their parities.
pub fn pick_observables(rng: &mut Rng64, sys: &SymmetricSystem, n: usize) -> (Vec<String>, qnslab::ObservableSet, Vec<i8>) {
    let mut set = qnslab::ObservableSet::new();
    for (i, op) in sys.even.iter().enumerate() {
        set.insert(format!("E{i}"), op.clone()).unwrap();
    }
    for (i, op) in sys.odd.iter().enumerate() {
        set.insert(format!("O{i}"), op.clone()).unwrap();
    }
    let mut labels = Vec::with_capacity(n);
    let mut parities = Vec::with_capacity(n);
    for _ in 0..n {
        let odd = rng.random_bool(0.5);
        let k = rng.random_range(0..3);
        labels.push(format!("{}{k}", if odd { "O" } else { "E" }));
        parities.push(if odd { -1 } else { 1 });
    }
    (labels, set, parities)
}
