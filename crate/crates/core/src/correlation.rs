//! Numerical evaluation of Wightman correlations and contour-time-ordered
//! correlations (CTOCs).
//!
//! Two independent routes compute a CTOC: nested application of the
//! superoperators B⁺A = ½{B, A} and B⁻A = −i[B, A] to ρ
//! ([`Evaluator::ctoc_direct`]), and the linear combination of Wightman terms
//! produced by [`expand_ctoc`] ([`Evaluator::ctoc_via_expansion`]).
//!
//! All products are formed in the eigenbasis of H, where Heisenberg evolution
//! is an entrywise phase: B(t)_{ab} = e^{i(e_a − e_b)t} B_{ab}. Traces are basis
//! independent, so no transformation back is needed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::contour::{expand_ctoc, EtaVector, Permutation, Sign};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::{DensityMatrix, QuantumOperator};
use crate::spectral::SpectralCache;

/// Largest imaginary residue tolerated for a CTOC before it is reported real.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Number of intermediate products an [`Evaluator`] keeps for reuse.
pub const MEMO_CAPACITY: usize = 64;

/// Named Hermitian observables that correlation specs refer to by label.
#[derive(Clone, Debug, Default)]
pub struct ObservableSet {
    entries: Vec<(String, QuantumOperator)>,
}

impl ObservableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(label: impl Into<String>, op: QuantumOperator) -> Result<Self> {
        let mut set = Self::new();
        set.insert(label, op)?;
        Ok(set)
    }

    pub fn insert(&mut self, label: impl Into<String>, op: QuantumOperator) -> Result<()> {
        let label = label.into();
        if !op.is_hermitian() {
            return Err(Error::NotHermitian { residual: linalg::hermiticity_residual(op.matrix()) });
        }
        if self.entries.iter().any(|(l, _)| *l == label) {
            return Err(Error::DuplicateObservable(label));
        }
        if let Some((_, first)) = self.entries.first() {
            first.ensure_same_dim(&op)?;
        }
        self.entries.push((label, op));
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&QuantumOperator> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, op)| op)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.entries.iter().position(|(l, _)| l == label).ok_or_else(|| Error::UnknownObservable(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &QuantumOperator)> {
        self.entries.iter().map(|(l, op)| (l.as_str(), op))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn check_increasing(times: &[f64]) -> Result<()> {
    let finite = times.iter().all(|t| t.is_finite());
    let increasing = times.windows(2).all(|w| w[0] < w[1]);
    if finite && increasing {
        Ok(())
    } else {
        Err(Error::TimesNotIncreasing(times.to_vec()))
    }
}

fn check_lengths(n: usize, times: &[f64], observables: &[String]) -> Result<()> {
    if times.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: times.len() });
    }
    if observables.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: observables.len() });
    }
    Ok(())
}

/// W^σ_n = Tr[B_{σ(n)} ··· B_{σ(1)} ρ] with B_i = B_{k_i}(t_i), t₁ < … < t_n.
#[derive(Clone, Debug, PartialEq)]
pub struct WightmanSpec {
    pub sigma: Permutation,
    pub times: Vec<f64>,
    pub observables: Vec<String>,
}

impl WightmanSpec {
    pub fn new(sigma: Permutation, times: Vec<f64>, observables: Vec<String>) -> Result<Self> {
        check_lengths(sigma.len(), &times, &observables)?;
        check_increasing(&times)?;
        Ok(Self { sigma, times, observables })
    }

    /// Every slot uses the same observable.
    pub fn uniform(sigma: Permutation, times: Vec<f64>, label: &str) -> Result<Self> {
        let n = sigma.len();
        Self::new(sigma, times, vec![label.to_string(); n])
    }

    pub fn order(&self) -> usize {
        self.sigma.len()
    }
}

/// C^η_n = Tr[B_n⁺ B_{n−1}^{η_{n−1}} ··· B_1^{η_1} ρ].
#[derive(Clone, Debug, PartialEq)]
pub struct CtocSpec {
    pub eta: EtaVector,
    pub times: Vec<f64>,
    pub observables: Vec<String>,
}

impl CtocSpec {
    pub fn new(eta: EtaVector, times: Vec<f64>, observables: Vec<String>) -> Result<Self> {
        check_lengths(eta.len(), &times, &observables)?;
        check_increasing(&times)?;
        Ok(Self { eta, times, observables })
    }

    pub fn uniform(eta: EtaVector, times: Vec<f64>, label: &str) -> Result<Self> {
        let n = eta.len();
        Self::new(eta, times, vec![label.to_string(); n])
    }

    pub fn order(&self) -> usize {
        self.eta.len()
    }
}

/// B⁺A = ½(BA + AB), B⁻A = −i(BA − AB).
pub fn apply_super(b: &QuantumOperator, sign: Sign, a: &QuantumOperator) -> Result<QuantumOperator> {
    b.ensure_same_dim(a)?;
    let out = super_product(b.matrix(), sign, a.matrix());
    if a.is_hermitian() && b.is_hermitian() {
        QuantumOperator::hermitian(linalg::hermitian_part(&out))
    } else {
        QuantumOperator::new(out)
    }
}

fn super_product(b: &CMatrix, sign: Sign, a: &CMatrix) -> CMatrix {
    let ba = linalg::matmul(b, a);
    let ab = linalg::matmul(a, b);
    match sign {
        Sign::Plus => (ba + ab) * Complex64::new(0.5, 0.0),
        Sign::Minus => (ba - ab) * Complex64::new(0.0, -1.0),
    }
}

/// One multiplication applied to the running operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Step {
    /// B · M
    Left { obs: usize, time: u64 },
    /// B^± M
    Super { obs: usize, time: u64, minus: bool },
}

impl Step {
    fn obs_time(self) -> (usize, f64) {
        match self {
            Step::Left { obs, time } | Step::Super { obs, time, .. } => (obs, f64::from_bits(time)),
        }
    }
}

/// Evolved observables for one evaluation point, keyed on (label, time).
#[derive(Default)]
pub(crate) struct EvolvedCache {
    map: HashMap<(usize, u64), Arc<CMatrix>>,
}

/// Evaluates correlations for a fixed Hamiltonian, state and observable set.
///
/// Safe to share across threads; the memo of intermediate products is
/// internally synchronized and bounded by [`MEMO_CAPACITY`].
pub struct Evaluator {
    hamiltonian: QuantumOperator,
    state: DensityMatrix,
    observables: ObservableSet,
    spectral: Arc<SpectralCache>,
    state_eig: CMatrix,
    observables_eig: Vec<CMatrix>,
    memo: Mutex<HashMap<Vec<Step>, Arc<CMatrix>>>,
}

impl Evaluator {
    pub fn new(hamiltonian: &QuantumOperator, state: &DensityMatrix, observables: &ObservableSet) -> Result<Self> {
        hamiltonian.ensure_same_dim(state.as_operator())?;
        for (_, op) in observables.iter() {
            hamiltonian.ensure_same_dim(op)?;
        }
        let spectral = hamiltonian.spectral()?;
        let state_eig = spectral.to_eigenbasis(state.matrix());
        let observables_eig = observables.iter().map(|(_, op)| spectral.to_eigenbasis(op.matrix())).collect();
        Ok(Self {
            hamiltonian: hamiltonian.clone(),
            state: state.clone(),
            observables: observables.clone(),
            spectral,
            state_eig,
            observables_eig,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn hamiltonian(&self) -> &QuantumOperator {
        &self.hamiltonian
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn observables(&self) -> &ObservableSet {
        &self.observables
    }

    pub fn spectral(&self) -> &SpectralCache {
        &self.spectral
    }

    pub(crate) fn resolve(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.observables.index_of(l)).collect()
    }

    fn evolved(&self, obs: usize, t: f64, cache: &mut EvolvedCache) -> Arc<CMatrix> {
        Arc::clone(
            cache
                .map
                .entry((obs, t.to_bits()))
                .or_insert_with(|| Arc::new(self.spectral.evolve_in_eigenbasis(&self.observables_eig[obs], t))),
        )
    }

    /// Applies `steps` to ρ in order, then returns Tr[B_final(t_final) · operand].
    fn contract(&self, steps: &[Step], last: (usize, f64), cache: &mut EvolvedCache) -> Complex64 {
        let (start, mut operand) = {
            let memo = self.memo.lock().expect("memo poisoned");
            (1..=steps.len())
                .rev()
                .find_map(|k| memo.get(&steps[..k]).map(|m| (k, Arc::clone(m))))
                .unwrap_or((0, Arc::new(self.state_eig.clone())))
        };
        for k in start..steps.len() {
            let (obs, t) = steps[k].obs_time();
            let b = self.evolved(obs, t, cache);
            let next = match steps[k] {
                Step::Left { .. } => linalg::matmul(&b, &operand),
                Step::Super { minus, .. } => super_product(&b, if minus { Sign::Minus } else { Sign::Plus }, &operand),
            };
            operand = Arc::new(next);
            let mut memo = self.memo.lock().expect("memo poisoned");
            if memo.len() < MEMO_CAPACITY {
                memo.entry(steps[..=k].to_vec()).or_insert_with(|| Arc::clone(&operand));
            }
        }
        let b = self.evolved(last.0, last.1, cache);
        linalg::trace_of_product(&b, &operand)
    }

    fn wightman_resolved(&self, sigma: &Permutation, times: &[f64], obs: &[usize], cache: &mut EvolvedCache) -> Complex64 {
        let n = sigma.len();
        let steps: Vec<Step> = (1..n)
            .map(|i| {
                let slot = sigma.get(i) - 1;
                Step::Left { obs: obs[slot], time: times[slot].to_bits() }
            })
            .collect();
        let top = sigma.get(n) - 1;
        self.contract(&steps, (obs[top], times[top]), cache)
    }

    fn ctoc_direct_resolved(&self, eta: &EtaVector, times: &[f64], obs: &[usize], cache: &mut EvolvedCache) -> Complex64 {
        let n = eta.len();
        let steps: Vec<Step> = (0..n - 1)
            .map(|j| Step::Super { obs: obs[j], time: times[j].to_bits(), minus: eta.get(j + 1) == Sign::Minus })
            .collect();
        self.contract(&steps, (obs[n - 1], times[n - 1]), cache)
    }

    fn ctoc_expansion_resolved(&self, eta: &EtaVector, times: &[f64], obs: &[usize], cache: &mut EvolvedCache) -> Complex64 {
        expand_ctoc(eta)
            .iter()
            .map(|term| term.coeff * self.wightman_resolved(&term.sigma, times, obs, cache))
            .sum()
    }

    /// Tr[B_{σ(n)}(t_{σ(n)}) ··· B_{σ(1)}(t_{σ(1)}) ρ].
    pub fn wightman(&self, spec: &WightmanSpec) -> Result<Complex64> {
        let obs = self.resolve(&spec.observables)?;
        Ok(self.wightman_resolved(&spec.sigma, &spec.times, &obs, &mut EvolvedCache::default()))
    }

    /// Tr[O_1(s_1) O_2(s_2) ··· O_k(s_k) ρ] for operators listed left to right.
    ///
    /// No ordering is imposed on the times; negative times are fine.
    pub fn trace_string(&self, ops: &[(&str, f64)]) -> Result<Complex64> {
        if ops.is_empty() {
            return Ok(self.state.as_operator().trace());
        }
        let mut resolved = Vec::with_capacity(ops.len());
        for &(label, t) in ops {
            if !t.is_finite() {
                return Err(Error::TimesNotIncreasing(ops.iter().map(|o| o.1).collect()));
            }
            resolved.push((self.observables.index_of(label)?, t));
        }
        let steps: Vec<Step> = resolved[1..].iter().rev().map(|&(obs, t)| Step::Left { obs, time: t.to_bits() }).collect();
        Ok(self.contract(&steps, resolved[0], &mut EvolvedCache::default()))
    }

    /// Nested superoperators applied to ρ, then traced against B_n(t_n).
    pub fn ctoc_direct(&self, spec: &CtocSpec) -> Result<f64> {
        let obs = self.resolve(&spec.observables)?;
        real_part(self.ctoc_direct_resolved(&spec.eta, &spec.times, &obs, &mut EvolvedCache::default()))
    }

    /// Σ_terms coeff · W^{σ_term}.
    pub fn ctoc_via_expansion(&self, spec: &CtocSpec) -> Result<f64> {
        let obs = self.resolve(&spec.observables)?;
        real_part(self.ctoc_expansion_resolved(&spec.eta, &spec.times, &obs, &mut EvolvedCache::default()))
    }

    pub(crate) fn evaluate_point(
        &self,
        kind: &crate::sweep::TemplateKind,
        times: &[f64],
        obs: &[usize],
        cache: &mut EvolvedCache,
    ) -> Result<Complex64> {
        use crate::sweep::TemplateKind;
        match kind {
            TemplateKind::Wightman(sigma) => Ok(self.wightman_resolved(sigma, times, obs, cache)),
            TemplateKind::Ctoc(eta) => {
                let value = self.ctoc_direct_resolved(eta, times, obs, cache);
                real_part(value).map(|re| Complex64::new(re, 0.0))
            }
        }
    }
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL {
        return Err(Error::ImaginaryResidual(z.im));
    }
    Ok(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pauli_string, Pauli};

    fn qubit(p: Pauli) -> QuantumOperator {
        pauli_string(1, &[(1, p)]).unwrap()
    }

    fn diag_state(p0: f64) -> DensityMatrix {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(p0, 0.0), Complex64::new(1.0 - p0, 0.0)]));
        DensityMatrix::new(QuantumOperator::hermitian(m).unwrap()).unwrap()
    }

    fn eval(h: Pauli, b: Pauli, rho: DensityMatrix) -> Evaluator {
        Evaluator::new(&qubit(h), &rho, &ObservableSet::single("B", qubit(b)).unwrap()).unwrap()
    }

    fn p(images: &[usize]) -> Permutation {
        Permutation::new(images.to_vec()).unwrap()
    }

    #[test]
    fn first_order_traceless_vanishes() {
        let e = eval(Pauli::X, Pauli::Z, DensityMatrix::maximally_mixed(1).unwrap());
        let w = e.wightman(&WightmanSpec::uniform(p(&[1]), vec![0.7], "B").unwrap()).unwrap();
        assert!(w.norm() < 1e-15);
    }

    #[test]
    fn commuting_eigenstate() {
        let e = eval(Pauli::Z, Pauli::Z, diag_state(1.0));
        for times in [vec![0.0, 1.0], vec![-3.0, 2.5]] {
            let w = e.wightman(&WightmanSpec::uniform(p(&[1, 2]), times, "B").unwrap()).unwrap();
            assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn two_point_closed_form() {
        // σx(t) = cos 2t σx − sin 2t σy under H = σz, so
        // Tr[σx(t2) σx(t1) ρ] = cos 2Δ + i sin 2Δ ⟨σz⟩, Δ = t2 − t1.
        let (t1, t2) = (0.0, 0.4);
        let delta: f64 = t2 - t1;
        for (p0, mean_z) in [(0.5, 0.0), (1.0, 1.0), (0.2, -0.6)] {
            let e = eval(Pauli::Z, Pauli::X, diag_state(p0));
            let forward = e.wightman(&WightmanSpec::uniform(p(&[1, 2]), vec![t1, t2], "B").unwrap()).unwrap();
            let backward = e.wightman(&WightmanSpec::uniform(p(&[2, 1]), vec![t1, t2], "B").unwrap()).unwrap();
            let expected = Complex64::new((2.0 * delta).cos(), (2.0 * delta).sin() * mean_z);
            assert!((forward - expected).norm() < 1e-14, "{forward} vs {expected}");
            assert!((forward - backward.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(WightmanSpec::uniform(p(&[1, 2]), vec![1.0, 1.0], "B"), Err(Error::TimesNotIncreasing(_))));
        assert!(matches!(WightmanSpec::uniform(p(&[1, 2]), vec![1.0], "B"), Err(Error::LengthMismatch { .. })));
        assert!(CtocSpec::uniform("++".parse().unwrap(), vec![2.0, 1.0], "B").is_err());
        let e = eval(Pauli::Z, Pauli::X, diag_state(0.5));
        let spec = WightmanSpec::uniform(p(&[1]), vec![0.0], "missing").unwrap();
        assert!(matches!(e.wightman(&spec), Err(Error::UnknownObservable(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let h = pauli_string(2, &[(1, Pauli::Z)]).unwrap();
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let obs = ObservableSet::single("B", qubit(Pauli::X)).unwrap();
        assert!(matches!(Evaluator::new(&h, &rho, &obs), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn apply_super_identities() {
        let z = qubit(Pauli::Z);
        let x = qubit(Pauli::X);
        let id = QuantumOperator::identity(1).unwrap();
        let vanishing = apply_super(&z, Sign::Minus, &z).unwrap();
        assert!(vanishing.max_abs() == 0.0);
        assert_eq!(apply_super(&x, Sign::Plus, &id).unwrap().matrix(), x.matrix());
        // −i[σz, σx] = −i·2iσy = 2σy
        let y2 = apply_super(&z, Sign::Minus, &x).unwrap();
        assert!(linalg::max_abs_diff(y2.matrix(), &(qubit(Pauli::Y).matrix() * Complex64::new(2.0, 0.0))) < 1e-15);
        assert!(y2.is_hermitian());
        let two = pauli_string(2, &[]).unwrap();
        assert!(apply_super(&x, Sign::Plus, &two).is_err());
    }

    #[test]
    fn anticommutator_trace_is_expectation() {
        let rho = diag_state(0.3);
        let z = qubit(Pauli::Z);
        let out = apply_super(&z, Sign::Plus, rho.as_operator()).unwrap();
        assert!((out.trace().re - (0.3 - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn vanishing_commutator_ctoc() {
        let e = eval(Pauli::Z, Pauli::Z, diag_state(0.8));
        let spec = CtocSpec::uniform("+-".parse().unwrap(), vec![0.0, 1.1], "B").unwrap();
        assert!(e.ctoc_direct(&spec).unwrap().abs() < 1e-15);
        assert!(e.ctoc_via_expansion(&spec).unwrap().abs() < 1e-15);
    }

    #[test]
    fn fluctuation_correlation_is_cosine() {
        let e = eval(Pauli::X, Pauli::Z, DensityMatrix::maximally_mixed(1).unwrap());
        for t in [0.1, 0.9, 2.5] {
            let spec = CtocSpec::uniform("++".parse().unwrap(), vec![0.0, t], "B").unwrap();
            assert!((e.ctoc_direct(&spec).unwrap() - (2.0 * t).cos()).abs() < 1e-14);
            assert!((e.ctoc_via_expansion(&spec).unwrap() - (2.0 * t).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn propagation_ctoc_is_commutator() {
        // C^{+-} = −i⟨[B2, B1]⟩ evaluated from raw Wightman values
        let e = eval(Pauli::Z, Pauli::X, diag_state(0.9));
        let times = vec![0.2, 0.75];
        let spec = CtocSpec::uniform("+-".parse().unwrap(), times.clone(), "B").unwrap();
        let w21 = e.trace_string(&[("B", times[1]), ("B", times[0])]).unwrap();
        let w12 = e.trace_string(&[("B", times[0]), ("B", times[1])]).unwrap();
        let expected = (Complex64::new(0.0, -1.0) * (w21 - w12)).re;
        assert!((e.ctoc_direct(&spec).unwrap() - expected).abs() < 1e-14);
        assert!((e.ctoc_via_expansion(&spec).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn first_order_both_routes() {
        let e = eval(Pauli::X, Pauli::Z, diag_state(0.75));
        let spec = CtocSpec::uniform("+".parse().unwrap(), vec![0.6], "B").unwrap();
        let expected = 0.5 * (2.0f64 * 0.6).cos();
        assert!((e.ctoc_direct(&spec).unwrap() - expected).abs() < 1e-14);
        assert!((e.ctoc_via_expansion(&spec).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn imaginary_residue_is_reported() {
        assert!(matches!(real_part(Complex64::new(1.0, 1e-6)), Err(Error::ImaginaryResidual(_))));
        assert_eq!(real_part(Complex64::new(1.0, 1e-12)).unwrap(), 1.0);
    }

    #[test]
    fn memo_does_not_change_results() {
        let e = eval(Pauli::X, Pauli::Z, diag_state(0.6));
        let spec = CtocSpec::uniform("+-+".parse().unwrap(), vec![0.0, 0.5, 1.5], "B").unwrap();
        let first = e.ctoc_direct(&spec).unwrap();
        let second = e.ctoc_direct(&spec).unwrap();
        assert_eq!(first.to_bits(), second.to_bits());
    }
}
