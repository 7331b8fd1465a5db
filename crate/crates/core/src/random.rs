//! Seeded random instances for randomized checks. Everything is driven by a
//! caller-supplied `ChaCha8Rng` so runs are reproducible.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::contour::Permutation;
use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::operator::{DensityMatrix, QuantumOperator};

pub use rand::SeedableRng;
pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Ginibre matrix with unit-variance complex Gaussian entries.
pub fn ginibre(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// (G + G†)/2 for a Ginibre G.
pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Result<QuantumOperator> {
    QuantumOperator::hermitian(linalg::hermitian_part(&ginibre(rng, dim)))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with the phases
/// of R's diagonal divided out.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim).qr();
    let r = qr.r();
    let phases = DVector::from_iterator(dim, r.diagonal().iter().map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) }));
    let mut q = qr.q();
    for (j, phase) in phases.iter().enumerate() {
        let mut col = q.column_mut(j);
        col *= *phase;
    }
    q
}

/// G G† / Tr(G G†): full rank with probability one.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> Result<DensityMatrix> {
    let g = ginibre(rng, dim);
    let gg = linalg::matmul(&g, &g.adjoint());
    let tr = linalg::trace(&gg).re;
    let rho = linalg::hermitian_part(&(gg / Complex64::new(tr, 0.0)));
    DensityMatrix::new(QuantumOperator::hermitian(rho)?)
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut images: Vec<usize> = (1..=n).collect();
    images.shuffle(rng);
    Permutation::new(images).expect("shuffle of 1..=n is a permutation")
}

/// n strictly increasing times in [−span, span] with gaps of at least 1e−3.
pub fn random_times(rng: &mut ChaCha8Rng, n: usize, span: f64) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(-span..=span)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return t;
        }
    }
}
