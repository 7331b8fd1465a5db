//! Model builders: Pauli strings, the transverse-field Ising chain, initial
//! states and observables.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};
use crate::operator::{check_sites, DensityMatrix, QuantumOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    #[serde(alias = "i")]
    Identity,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-site 2×2 matrix.
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::Identity => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// ⟨row_bit| P |row_bit ⊕ flip⟩.
    fn entry(self, row_bit: usize) -> Complex64 {
        match (self, row_bit) {
            (Pauli::Identity | Pauli::X, _) => ONE,
            (Pauli::Y, 0) => -I,
            (Pauli::Y, _) => I,
            (Pauli::Z, 0) => ONE,
            (Pauli::Z, _) => -ONE,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::Identity => 'i',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        };
        write!(f, "{c}")
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "identity" => Ok(Pauli::Identity),
            "x" => Ok(Pauli::X),
            "y" => Ok(Pauli::Y),
            "z" => Ok(Pauli::Z),
            other => Err(Error::config("axis", format!("unknown Pauli axis `{other}`"))),
        }
    }
}

/// Kronecker product of single-site Pauli factors, identity on unlisted sites.
///
/// Sites are 1-based; site 1 is the most significant factor. Built directly from
/// the bit structure (each Pauli string has one nonzero entry per row).
pub fn pauli_string(sites: usize, factors: &[(usize, Pauli)]) -> Result<QuantumOperator> {
    check_sites(sites, 1)?;
    let mut per_site = vec![Pauli::Identity; sites + 1];
    let mut seen = vec![false; sites + 1];
    for &(site, axis) in factors {
        if site == 0 || site > sites {
            return Err(Error::SiteOutOfRange { site, sites });
        }
        if seen[site] {
            return Err(Error::DuplicateSite(site));
        }
        seen[site] = true;
        per_site[site] = axis;
    }
    let bit = |site: usize| sites - site;
    let flip_mask = (1..=sites).filter(|&s| per_site[s].flips()).fold(0usize, |m, s| m | (1 << bit(s)));

    let dim = 1usize << sites;
    let mut m = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let value = (1..=sites).fold(ONE, |acc, s| acc * per_site[s].entry((row >> bit(s)) & 1));
        m[(row, row ^ flip_mask)] = value;
    }
    QuantumOperator::hermitian(m)
}

/// Σ_k c_k P_k with real coefficients.
pub fn pauli_sum(sites: usize, terms: &[(f64, Vec<(usize, Pauli)>)]) -> Result<QuantumOperator> {
    check_sites(sites, 1)?;
    let dim = 1usize << sites;
    let mut m = CMatrix::zeros(dim, dim);
    for (coefficient, factors) in terms {
        m += pauli_string(sites, factors)?.matrix() * Complex64::new(*coefficient, 0.0);
    }
    QuantumOperator::hermitian(m)
}

/// Nearest-neighbour bonds (j, j+1); with `periodic`, site N+1 is site 1.
pub fn chain_bonds(sites: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (1..sites).map(|j| (j, j + 1)).collect();
    if periodic {
        bonds.push((sites, 1));
    }
    bonds
}

/// H = −Σ_j σ^z_j − λ Σ_j σ^x_j σ^x_{j+1}.
pub fn build_tfim(sites: usize, coupling: f64, periodic: bool) -> Result<QuantumOperator> {
    build_tfim_with_field(sites, coupling, 1.0, periodic)
}

/// H = −h Σ_j σ^z_j − λ Σ_j σ^x_j σ^x_{j+1}.
///
/// Accumulated term by term from [`pauli_string`], field terms first, so it equals
/// that sum bit for bit.
pub fn build_tfim_with_field(sites: usize, coupling: f64, field: f64, periodic: bool) -> Result<QuantumOperator> {
    check_sites(sites, 2)?;
    let dim = 1usize << sites;
    let mut h = CMatrix::zeros(dim, dim);
    for j in 1..=sites {
        h += pauli_string(sites, &[(j, Pauli::Z)])?.matrix() * Complex64::new(-field, 0.0);
    }
    for (a, b) in chain_bonds(sites, periodic) {
        h += pauli_string(sites, &[(a, Pauli::X), (b, Pauli::X)])?.matrix() * Complex64::new(-coupling, 0.0);
    }
    QuantumOperator::hermitian(h)
}

/// A term that breaks the time-reversal symmetry of the chain: a
/// Dzyaloshinskii-Moriya coupling on bond (1,2) plus a σ^x field on site 1.
/// Used as a negative control.
pub fn t_breaking_term(sites: usize, strength: f64) -> Result<QuantumOperator> {
    check_sites(sites, 2)?;
    pauli_sum(
        sites,
        &[
            (strength, vec![(1, Pauli::X), (2, Pauli::Y)]),
            (-strength, vec![(1, Pauli::Y), (2, Pauli::X)]),
            (0.6 * strength, vec![(1, Pauli::X)]),
        ],
    )
}

/// ρ = e^{−βH}/Z. β = 0 gives exactly I/dim.
pub fn thermal_state(h: &QuantumOperator, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::NegativeBeta(beta));
    }
    if beta == 0.0 {
        return DensityMatrix::maximally_mixed(h.sites());
    }
    let cache = h.spectral()?;
    let ground = cache.min_eigenvalue();
    let z: f64 = cache.eigenvalues().iter().map(|&e| (-beta * (e - ground)).exp()).sum();
    let rho = cache.function_of(|e| (-beta * (e - ground)).exp() / z);
    DensityMatrix::new(QuantumOperator::hermitian(crate::linalg::hermitian_part(&rho))?)
}

/// ρ = ⊗_l [(σ^x + I)/2 on site 2l−1] ⊗ [I/2 on site 2l].
pub fn product_state_c(sites: usize) -> Result<DensityMatrix> {
    check_sites(sites, 2)?;
    if !sites.is_multiple_of(2) {
        return Err(Error::OddSiteCount(sites));
    }
    let half = Complex64::new(0.5, 0.0);
    let projector = (Pauli::X.matrix() + Pauli::Identity.matrix()) * half;
    let mixed = Pauli::Identity.matrix() * half;
    let mut rho = CMatrix::identity(1, 1);
    for site in 1..=sites {
        let factor = if site % 2 == 1 { &projector } else { &mixed };
        rho = rho.kronecker(factor);
    }
    DensityMatrix::new(QuantumOperator::hermitian(rho)?)
}

/// B = (1/√N) Σ_j σ^z_j.
pub fn collective_z(sites: usize) -> Result<QuantumOperator> {
    check_sites(sites, 1)?;
    let dim = 1usize << sites;
    let norm = 1.0 / (sites as f64).sqrt();
    let diag: Vec<Complex64> = (0..dim)
        .map(|index| {
            let up = sites as i64 - 2 * index.count_ones() as i64;
            Complex64::new(up as f64 * norm, 0.0)
        })
        .collect();
    QuantumOperator::hermitian(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}
