//! Generalized particle-hole (C), time-reversal (T) and chiral (S) symmetries
//! and numerical verification of the constraints they place on correlations.
//!
//! A transform 𝓜 only has to be invertible. The defining relations are
//!
//! * C: 𝓜 H^T 𝓜⁻¹ = −H, 𝓜 ρ^T 𝓜⁻¹ = ρ
//! * T: 𝓜 H^* 𝓜⁻¹ = +H, 𝓜 ρ^* 𝓜⁻¹ = ρ
//! * S: 𝓜 H 𝓜⁻¹ = −H,   𝓜 ρ 𝓜⁻¹ = ρ
//!
//! Every check is invariant under 𝓜 → c𝓜 because 𝓜 and 𝓜⁻¹ always appear
//! together.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{EtaVector, Permutation, TimeReflection};
use crate::correlation::{Evaluator, WightmanSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{pauli_string, Pauli};
use crate::operator::{DensityMatrix, QuantumOperator};

/// Default relative tolerance for symmetry relations.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Default absolute tolerance for theorem equalities.
pub const THEOREM_TOL: f64 = 1e-9;
/// log(1e−12): smallest accepted |det 𝓜| relative to max|𝓜|^dim.
const LOG_DET_FLOOR: f64 = -27.631021115928547;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymmetryKind {
    C,
    T,
    S,
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryKind::C => "C",
            SymmetryKind::T => "T",
            SymmetryKind::S => "S",
        })
    }
}

/// An invertible matrix 𝓜 tagged with the relation it is meant to satisfy.
#[derive(Clone, Debug)]
pub struct SymmetryTransform {
    kind: SymmetryKind,
    matrix: CMatrix,
    inverse: CMatrix,
}

impl SymmetryTransform {
    pub fn new(kind: SymmetryKind, matrix: CMatrix) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, found: c });
        }
        let scale = linalg::max_abs(&matrix);
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::SingularTransform);
        }
        let lu = matrix.clone().lu();
        let log_det: f64 = lu.u().diagonal().iter().map(|z| (z.norm() / scale).ln()).sum();
        if log_det.is_nan() || log_det <= LOG_DET_FLOOR {
            return Err(Error::SingularTransform);
        }
        let inverse = lu.try_inverse().ok_or(Error::SingularTransform)?;
        if inverse.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularTransform);
        }
        Ok(Self { kind, matrix, inverse })
    }

    pub fn from_pauli_string(kind: SymmetryKind, sites: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        Self::new(kind, pauli_string(sites, factors)?.into_matrix())
    }

    pub fn kind(&self) -> SymmetryKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// c·𝓜 for a nonzero scalar c.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        Self::new(self.kind, &self.matrix * c)
    }

    /// 𝓜 A^T 𝓜⁻¹ (C), 𝓜 A^* 𝓜⁻¹ (T) or 𝓜 A 𝓜⁻¹ (S).
    pub fn transform(&self, a: &CMatrix) -> CMatrix {
        let inner = match self.kind {
            SymmetryKind::C => a.transpose(),
            SymmetryKind::T => linalg::conjugate(a),
            SymmetryKind::S => a.clone(),
        };
        linalg::matmul(&linalg::matmul(&self.matrix, &inner), &self.inverse)
    }

    /// Sign H must pick up: −1 for C and S, +1 for T.
    pub fn hamiltonian_sign(&self) -> f64 {
        match self.kind {
            SymmetryKind::T => 1.0,
            SymmetryKind::C | SymmetryKind::S => -1.0,
        }
    }

    fn ensure_dim(&self, op: &QuantumOperator) -> Result<()> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(())
    }
}

/// 𝒞 = ∏_l σ^x_{2l−1} σ^y_{2l} for an even chain.
pub fn tfim_c_transform(sites: usize) -> Result<SymmetryTransform> {
    if !sites.is_multiple_of(2) {
        return Err(Error::OddSiteCount(sites));
    }
    let factors: Vec<(usize, Pauli)> = (1..=sites).map(|s| (s, if s % 2 == 1 { Pauli::X } else { Pauli::Y })).collect();
    SymmetryTransform::from_pauli_string(SymmetryKind::C, sites, &factors)
}

/// 𝒯 = ∏_l σ^z_l.
pub fn tfim_t_transform(sites: usize) -> Result<SymmetryTransform> {
    let factors: Vec<(usize, Pauli)> = (1..=sites).map(|s| (s, Pauli::Z)).collect();
    SymmetryTransform::from_pauli_string(SymmetryKind::T, sites, &factors)
}

/// Relative residuals of the two defining relations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryResiduals {
    /// max|𝓜·H·𝓜⁻¹ ∓ H| / max|H|
    pub hamiltonian: f64,
    /// max|𝓜·ρ·𝓜⁻¹ − ρ| / max|ρ|
    pub state: f64,
}

impl SymmetryResiduals {
    pub fn holds(&self, tol: f64) -> bool {
        self.hamiltonian <= tol && self.state <= tol
    }
}

fn relative(residual: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        residual
    } else {
        residual / scale
    }
}

pub fn symmetry_residuals(tr: &SymmetryTransform, h: &QuantumOperator, rho: &DensityMatrix) -> Result<SymmetryResiduals> {
    tr.ensure_dim(h)?;
    tr.ensure_dim(rho.as_operator())?;
    let expected_h = h.matrix() * Complex64::new(tr.hamiltonian_sign(), 0.0);
    let hamiltonian = relative(linalg::max_abs_diff(&tr.transform(h.matrix()), &expected_h), h.max_abs());
    let state = relative(linalg::max_abs_diff(&tr.transform(rho.matrix()), rho.matrix()), linalg::max_abs(rho.matrix()));
    Ok(SymmetryResiduals { hamiltonian, state })
}

pub fn check_symmetry(tr: &SymmetryTransform, h: &QuantumOperator, rho: &DensityMatrix, tol: f64) -> Result<bool> {
    Ok(symmetry_residuals(tr, h, rho)?.holds(tol))
}

/// α (C), β (T) or γ (S): the sign an observable picks up under the transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Parity {
    pub kind: SymmetryKind,
    pub value: i8,
}

/// `Some(±1)` if the transformed B equals ±B within tol·max|B|, `None` otherwise.
pub fn observable_parity(tr: &SymmetryTransform, b: &QuantumOperator, tol: f64) -> Result<Option<Parity>> {
    tr.ensure_dim(b)?;
    if !b.is_hermitian() {
        return Err(Error::NotHermitian { residual: linalg::hermiticity_residual(b.matrix()) });
    }
    let image = tr.transform(b.matrix());
    let scale = b.max_abs();
    let even = relative(linalg::max_abs_diff(&image, b.matrix()), scale);
    let odd = relative(linalg::max_abs_diff(&image, &(b.matrix() * Complex64::new(-1.0, 0.0))), scale);
    let value = if even <= tol {
        1
    } else if odd <= tol {
        -1
    } else {
        return Ok(None);
    };
    Ok(Some(Parity { kind: tr.kind, value }))
}

/// 𝒮 = 𝒞·𝒯⁻¹. Both inputs are verified against (H, ρ) first and the product
/// is verified as an S-transform afterwards.
pub fn compose_s(
    c: &SymmetryTransform,
    t: &SymmetryTransform,
    h: &QuantumOperator,
    rho: &DensityMatrix,
    tol: f64,
) -> Result<SymmetryTransform> {
    if c.kind != SymmetryKind::C {
        return Err(Error::WrongTransformKind { expected: "C".into(), found: c.kind.to_string() });
    }
    if t.kind != SymmetryKind::T {
        return Err(Error::WrongTransformKind { expected: "T".into(), found: t.kind.to_string() });
    }
    if c.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: t.dim() });
    }
    for tr in [c, t] {
        if !check_symmetry(tr, h, rho, tol)? {
            return Err(Error::Precondition(format!("{} symmetry does not hold for the given H and ρ", tr.kind)));
        }
    }
    let s = SymmetryTransform::new(SymmetryKind::S, linalg::matmul(&c.matrix, &t.inverse))?;
    let residuals = symmetry_residuals(&s, h, rho)?;
    if !residuals.holds(tol) {
        return Err(Error::Precondition(format!("composed S fails verification: {residuals:?}")));
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionVerdict {
    Forbidden,
    Allowed,
}

/// C^η_n vanishes when ∏η + ∏α = 0, i.e. ∏η·∏α = −1.
pub fn selection_rule(eta: &EtaVector, alphas: &[i8]) -> Result<SelectionVerdict> {
    if alphas.len() != eta.len() {
        return Err(Error::LengthMismatch { expected: eta.len(), found: alphas.len() });
    }
    if alphas.iter().any(|a| a.abs() != 1) {
        return Err(Error::Precondition(format!("parities must be ±1, got {alphas:?}")));
    }
    let alpha: i8 = alphas.iter().product();
    Ok(if eta.product() * alpha == -1 { SelectionVerdict::Forbidden } else { SelectionVerdict::Allowed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// W^{σ̃} = W^σ ∏α
    #[serde(alias = "theorem1", alias = "C")]
    ParticleHole,
    /// W^σ = W^{σ̃}({t → −t}) ∏β
    #[serde(alias = "theorem2", alias = "T")]
    TimeReversal,
    /// W^σ = W^σ({t → −t}) ∏γ
    #[serde(alias = "theorem3", alias = "S")]
    Chiral,
}

impl Theorem {
    pub fn kind(self) -> SymmetryKind {
        match self {
            Theorem::ParticleHole => SymmetryKind::C,
            Theorem::TimeReversal => SymmetryKind::T,
            Theorem::Chiral => SymmetryKind::S,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Canonical label (ascending times) of the right-hand side of a T/S relation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalLabel {
    pub sigma: Permutation,
    pub trace_label: String,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub sigma: Permutation,
    pub times: Vec<f64>,
    pub observables: Vec<String>,
    pub parities: Vec<i8>,
    pub parity_product: i8,
    pub lhs: ComplexValue,
    pub rhs: ComplexValue,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical_rhs: Option<CanonicalLabel>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub symmetry_tol: f64,
    pub theorem_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { symmetry_tol: SYMMETRY_TOL, theorem_tol: THEOREM_TOL }
    }
}

fn slot_parities(ev: &Evaluator, spec: &WightmanSpec, tr: &SymmetryTransform, tol: f64) -> Result<Vec<i8>> {
    let mut known: HashMap<&str, i8> = HashMap::new();
    let mut out = Vec::with_capacity(spec.observables.len());
    for label in &spec.observables {
        let value = match known.get(label.as_str()) {
            Some(v) => *v,
            None => {
                let op = ev.observables().get(label).ok_or_else(|| Error::UnknownObservable(label.clone()))?;
                let parity = observable_parity(tr, op, tol)?
                    .ok_or_else(|| Error::Precondition(format!("observable `{label}` has no definite {}-parity", tr.kind)))?;
                known.insert(label, parity.value);
                parity.value
            }
        };
        out.push(value);
    }
    Ok(out)
}

fn require_symmetry(ev: &Evaluator, tr: &SymmetryTransform, expected: SymmetryKind, tol: f64) -> Result<()> {
    if tr.kind != expected {
        return Err(Error::WrongTransformKind { expected: expected.to_string(), found: tr.kind.to_string() });
    }
    let residuals = symmetry_residuals(tr, ev.hamiltonian(), ev.state())?;
    if !residuals.holds(tol) {
        return Err(Error::Precondition(format!("{expected} symmetry does not hold: {residuals:?}")));
    }
    Ok(())
}

fn require_stationary(ev: &Evaluator, tol: f64) -> Result<()> {
    let h = ev.hamiltonian();
    let residual = linalg::commutator_norm(ev.state().matrix(), h.matrix());
    if residual > tol * h.max_abs() {
        return Err(Error::Precondition(format!("initial state is not stationary: max|[ρ,H]| = {residual:.3e}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn report(
    theorem: Theorem,
    spec: &WightmanSpec,
    parities: Vec<i8>,
    lhs: Complex64,
    rhs_unsigned: Complex64,
    tolerance: f64,
    canonical_rhs: Option<CanonicalLabel>,
) -> TheoremReport {
    let parity_product: i8 = parities.iter().product();
    let rhs = rhs_unsigned * f64::from(parity_product);
    let max_deviation = (lhs - rhs).norm();
    TheoremReport {
        theorem,
        sigma: spec.sigma.clone(),
        times: spec.times.clone(),
        observables: spec.observables.clone(),
        parities,
        parity_product,
        lhs: lhs.into(),
        rhs: rhs.into(),
        max_deviation,
        tolerance,
        pass: max_deviation <= tolerance,
        canonical_rhs,
    }
}

/// Compares W^{σ̃} with ∏α · W^σ.
pub fn verify_theorem1(ev: &Evaluator, spec: &WightmanSpec, c: &SymmetryTransform, opts: VerifyOptions) -> Result<TheoremReport> {
    require_symmetry(ev, c, SymmetryKind::C, opts.symmetry_tol)?;
    let parities = slot_parities(ev, spec, c, opts.symmetry_tol)?;
    let reversed = WightmanSpec::new(spec.sigma.reversed(), spec.times.clone(), spec.observables.clone())?;
    let lhs = ev.wightman(&reversed)?;
    let rhs = ev.wightman(spec)?;
    Ok(report(Theorem::ParticleHole, spec, parities, lhs, rhs, opts.theorem_tol, None))
}

fn slot_ops(spec: &WightmanSpec, order: impl Iterator<Item = usize>) -> Vec<(&str, f64)> {
    order.map(|slot| (spec.observables[slot - 1].as_str(), -spec.times[slot - 1])).collect()
}

fn canonical(map_sigma: Permutation, spec: &WightmanSpec) -> CanonicalLabel {
    CanonicalLabel { trace_label: map_sigma.trace_label(), sigma: map_sigma, times: TimeReflection.apply(&spec.times) }
}

/// Compares W^σ(t) with ∏β · W^{σ̃}(−t), the latter evaluated directly at the
/// negated times.
pub fn verify_theorem2(ev: &Evaluator, spec: &WightmanSpec, t: &SymmetryTransform, opts: VerifyOptions) -> Result<TheoremReport> {
    require_symmetry(ev, t, SymmetryKind::T, opts.symmetry_tol)?;
    require_stationary(ev, opts.symmetry_tol)?;
    let parities = slot_parities(ev, spec, t, opts.symmetry_tol)?;
    let lhs = ev.wightman(spec)?;
    // W^{σ̃} = Tr[B_{σ(1)} ··· B_{σ(n)} ρ]
    let n = spec.order();
    let rhs = ev.trace_string(&slot_ops(spec, (1..=n).map(|i| spec.sigma.get(i))))?;
    let label = canonical(spec.sigma.t_transform().sigma, spec);
    Ok(report(Theorem::TimeReversal, spec, parities, lhs, rhs, opts.theorem_tol, Some(label)))
}

/// Compares W^σ(t) with ∏γ · W^σ(−t).
pub fn verify_theorem3(ev: &Evaluator, spec: &WightmanSpec, s: &SymmetryTransform, opts: VerifyOptions) -> Result<TheoremReport> {
    require_symmetry(ev, s, SymmetryKind::S, opts.symmetry_tol)?;
    require_stationary(ev, opts.symmetry_tol)?;
    let parities = slot_parities(ev, spec, s, opts.symmetry_tol)?;
    let lhs = ev.wightman(spec)?;
    let n = spec.order();
    let rhs = ev.trace_string(&slot_ops(spec, (1..=n).rev().map(|i| spec.sigma.get(i))))?;
    let label = canonical(spec.sigma.s_transform().sigma, spec);
    Ok(report(Theorem::Chiral, spec, parities, lhs, rhs, opts.theorem_tol, Some(label)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::ObservableSet;
    use crate::model::{build_tfim, collective_z, product_state_c, thermal_state};

    fn p(images: &[usize]) -> Permutation {
        Permutation::new(images.to_vec()).unwrap()
    }

    fn qubit(axis: Pauli) -> QuantumOperator {
        pauli_string(1, &[(1, axis)]).unwrap()
    }

    #[test]
    fn singular_transform_is_rejected() {
        assert!(matches!(SymmetryTransform::new(SymmetryKind::C, CMatrix::zeros(2, 2)), Err(Error::SingularTransform)));
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = Complex64::new(1e-14, 0.0);
        assert!(matches!(SymmetryTransform::new(SymmetryKind::T, m), Err(Error::SingularTransform)));
        // non-unitary but invertible is fine
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = Complex64::new(3.0, 0.0);
        assert!(SymmetryTransform::new(SymmetryKind::S, m).is_ok());
    }

    #[test]
    fn tfim_c_symmetry_with_product_state() {
        let h = build_tfim(8, 1.5, true).unwrap();
        let rho = product_state_c(8).unwrap();
        let c = tfim_c_transform(8).unwrap();
        assert!(check_symmetry(&c, &h, &rho, SYMMETRY_TOL).unwrap());
    }

    #[test]
    fn tfim_t_symmetry_with_thermal_state() {
        let h = build_tfim(8, 1.5, true).unwrap();
        let rho = thermal_state(&h, 1.0).unwrap();
        let t = tfim_t_transform(8).unwrap();
        assert!(check_symmetry(&t, &h, &rho, SYMMETRY_TOL).unwrap());
        // the thermal state is not C-symmetric
        assert!(!check_symmetry(&tfim_c_transform(8).unwrap(), &h, &rho, SYMMETRY_TOL).unwrap());
    }

    #[test]
    fn identity_is_not_a_c_transform_for_sigma_z() {
        let c = SymmetryTransform::new(SymmetryKind::C, CMatrix::identity(2, 2)).unwrap();
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(!check_symmetry(&c, &qubit(Pauli::Z), &rho, SYMMETRY_TOL).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let c = tfim_c_transform(2).unwrap();
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(matches!(check_symmetry(&c, &qubit(Pauli::Z), &rho, SYMMETRY_TOL), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn collective_z_parities() {
        let b = collective_z(8).unwrap();
        let alpha = observable_parity(&tfim_c_transform(8).unwrap(), &b, SYMMETRY_TOL).unwrap().unwrap();
        assert_eq!(alpha, Parity { kind: SymmetryKind::C, value: -1 });
        let beta = observable_parity(&tfim_t_transform(8).unwrap(), &b, SYMMETRY_TOL).unwrap().unwrap();
        assert_eq!(beta.value, 1);
    }

    #[test]
    fn mixed_parity_observable() {
        let c = SymmetryTransform::from_pauli_string(SymmetryKind::C, 1, &[(1, Pauli::X)]).unwrap();
        let b = qubit(Pauli::X).add(&qubit(Pauli::Z)).unwrap();
        assert_eq!(observable_parity(&c, &b, SYMMETRY_TOL).unwrap(), None);
        let y = qubit(Pauli::Y);
        assert_eq!(observable_parity(&c, &y, SYMMETRY_TOL).unwrap().unwrap().value, 1);
    }

    #[test]
    fn parity_is_scale_invariant() {
        let b = collective_z(4).unwrap();
        let c = tfim_c_transform(4).unwrap();
        let scaled = c.scaled(Complex64::new(-2.5, 0.7)).unwrap();
        assert_eq!(observable_parity(&scaled, &b, SYMMETRY_TOL).unwrap().unwrap().value, -1);
        let h = build_tfim(4, 1.5, true).unwrap();
        let rho = product_state_c(4).unwrap();
        assert!(check_symmetry(&scaled, &h, &rho, SYMMETRY_TOL).unwrap());
    }

    #[test]
    fn single_site_chiral_composition() {
        let h = qubit(Pauli::Z);
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let c = SymmetryTransform::from_pauli_string(SymmetryKind::C, 1, &[(1, Pauli::X)]).unwrap();
        let t = SymmetryTransform::new(SymmetryKind::T, CMatrix::identity(2, 2)).unwrap();
        let s = compose_s(&c, &t, &h, &rho, SYMMETRY_TOL).unwrap();
        assert_eq!(s.kind(), SymmetryKind::S);
        assert!(linalg::max_abs_diff(s.matrix(), &Pauli::X.matrix()) < 1e-15);
        let flipped = s.transform(h.matrix());
        assert!(linalg::max_abs_diff(&flipped, &(h.matrix() * Complex64::new(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn compose_rejects_mismatched_inputs() {
        let h = qubit(Pauli::Z);
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let c = SymmetryTransform::from_pauli_string(SymmetryKind::C, 1, &[(1, Pauli::X)]).unwrap();
        let t2 = tfim_t_transform(2).unwrap();
        assert!(matches!(compose_s(&c, &t2, &h, &rho, SYMMETRY_TOL), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(compose_s(&c, &c, &h, &rho, SYMMETRY_TOL), Err(Error::WrongTransformKind { .. })));
    }

    #[test]
    fn tfim_chiral_composition() {
        let n = 4;
        let h = build_tfim(n, 1.5, true).unwrap();
        let rho = DensityMatrix::maximally_mixed(n).unwrap();
        let s = compose_s(&tfim_c_transform(n).unwrap(), &tfim_t_transform(n).unwrap(), &h, &rho, SYMMETRY_TOL).unwrap();
        assert!(check_symmetry(&s, &h, &rho, SYMMETRY_TOL).unwrap());
        let gamma = observable_parity(&s, &collective_z(n).unwrap(), SYMMETRY_TOL).unwrap().unwrap();
        assert_eq!(gamma.value, -1);
    }

    #[test]
    fn selection_rule_examples() {
        let eta = |s: &str| s.parse::<EtaVector>().unwrap();
        assert_eq!(selection_rule(&eta("+-"), &[-1, -1]).unwrap(), SelectionVerdict::Forbidden);
        assert_eq!(selection_rule(&eta("+-+"), &[-1, -1, -1]).unwrap(), SelectionVerdict::Allowed);
        assert_eq!(selection_rule(&eta("+++"), &[1, 1, 1]).unwrap(), SelectionVerdict::Allowed);
        assert!(matches!(selection_rule(&eta("++"), &[1]), Err(Error::LengthMismatch { .. })));
        assert!(selection_rule(&eta("++"), &[1, 0]).is_err());
    }

    #[test]
    fn selection_pattern_for_both_parity_rows() {
        // rows: B^T → −B, B^T → +B; "0" forbidden, "-" allowed
        let columns = ["+-", "++", "+--", "++-", "+-+", "+++"];
        let expected = [
            (-1, ["0", "-", "0", "-", "-", "0"]),
            (1, ["0", "-", "-", "0", "0", "-"]),
        ];
        for (alpha, cells) in expected {
            for (col, cell) in columns.iter().zip(cells) {
                let eta: EtaVector = col.parse().unwrap();
                let verdict = selection_rule(&eta, &vec![alpha; eta.len()]).unwrap();
                let mark = if verdict == SelectionVerdict::Forbidden { "0" } else { "-" };
                assert_eq!(mark, cell, "alpha {alpha}, C^{col}");
            }
        }
    }

    fn tfim_c_setup(n: usize) -> (Evaluator, SymmetryTransform) {
        let h = build_tfim(n, 1.5, true).unwrap();
        let rho = product_state_c(n).unwrap();
        let obs = ObservableSet::single("B", collective_z(n).unwrap()).unwrap();
        (Evaluator::new(&h, &rho, &obs).unwrap(), tfim_c_transform(n).unwrap())
    }

    #[test]
    fn theorem1_identity_third_order() {
        let (ev, c) = tfim_c_setup(4);
        let spec = WightmanSpec::uniform(Permutation::identity(3), vec![0.0, 2.0, 5.0], "B").unwrap();
        let r = verify_theorem1(&ev, &spec, &c, VerifyOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.parity_product, -1);
        assert!(r.lhs.re.abs() + r.lhs.im.abs() > 1e-3);
    }

    #[test]
    fn theorem1_first_order_forces_zero_mean() {
        let (ev, c) = tfim_c_setup(4);
        let spec = WightmanSpec::uniform(p(&[1]), vec![1.3], "B").unwrap();
        let r = verify_theorem1(&ev, &spec, &c, VerifyOptions::default()).unwrap();
        assert!(r.pass);
        assert!(r.lhs.re.abs() < 1e-12 && r.lhs.im.abs() < 1e-12);
    }

    #[test]
    fn theorem1_rejects_thermal_state() {
        let n = 4;
        let h = build_tfim(n, 1.5, true).unwrap();
        let rho = thermal_state(&h, 1.0).unwrap();
        let obs = ObservableSet::single("B", collective_z(n).unwrap()).unwrap();
        let ev = Evaluator::new(&h, &rho, &obs).unwrap();
        let spec = WightmanSpec::uniform(Permutation::identity(2), vec![0.0, 1.0], "B").unwrap();
        let err = verify_theorem1(&ev, &spec, &tfim_c_transform(n).unwrap(), VerifyOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn theorem2_rejects_non_stationary_state() {
        let n = 4;
        let h = build_tfim(n, 1.5, true).unwrap();
        // T-symmetric (real) but does not commute with H
        let rho = product_state_c(n).unwrap();
        let obs = ObservableSet::single("B", collective_z(n).unwrap()).unwrap();
        let ev = Evaluator::new(&h, &rho, &obs).unwrap();
        let t = SymmetryTransform::new(SymmetryKind::T, CMatrix::identity(16, 16)).unwrap();
        let spec = WightmanSpec::uniform(Permutation::identity(2), vec![0.0, 1.0], "B").unwrap();
        let err = verify_theorem2(&ev, &spec, &t, VerifyOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(msg) if msg.contains("stationary")));
    }

    #[test]
    fn theorem2_first_order_is_trivial() {
        let n = 4;
        let h = build_tfim(n, 1.5, true).unwrap();
        let rho = thermal_state(&h, 0.7).unwrap();
        let obs = ObservableSet::single("B", collective_z(n).unwrap()).unwrap();
        let ev = Evaluator::new(&h, &rho, &obs).unwrap();
        let spec = WightmanSpec::uniform(p(&[1]), vec![2.2], "B").unwrap();
        let r = verify_theorem2(&ev, &spec, &tfim_t_transform(n).unwrap(), VerifyOptions::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.parity_product, 1);
    }

    #[test]
    fn theorem3_first_order_forces_zero_mean() {
        let n = 4;
        let h = build_tfim(n, 1.5, true).unwrap();
        let rho = DensityMatrix::maximally_mixed(n).unwrap();
        let obs = ObservableSet::single("B", collective_z(n).unwrap()).unwrap();
        let ev = Evaluator::new(&h, &rho, &obs).unwrap();
        let s = compose_s(&tfim_c_transform(n).unwrap(), &tfim_t_transform(n).unwrap(), &h, &rho, SYMMETRY_TOL).unwrap();
        let r = verify_theorem3(&ev, &WightmanSpec::uniform(p(&[1]), vec![0.4], "B").unwrap(), &s, VerifyOptions::default()).unwrap();
        assert!(r.pass);
        assert!(r.lhs.re.abs() < 1e-12);
        // all times zero: both sides are the same number
        let spec = WightmanSpec::uniform(p(&[1, 2]), vec![-0.0, 0.0], "B");
        assert!(spec.is_err(), "coincident times are rejected");
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let (ev, c) = tfim_c_setup(2);
        let spec = WightmanSpec::uniform(p(&[1]), vec![0.0], "B").unwrap();
        assert!(matches!(verify_theorem2(&ev, &spec, &c, VerifyOptions::default()), Err(Error::WrongTransformKind { .. })));
    }
}
