//! Higher-order correlation functions of small spin systems on the Keldysh
//! contour, and the constraints generalized C, T and S symmetries place on them.
//!
//! Modules, roughly bottom-up:
//!
//! * [`operator`], [`spectral`], [`model`]: dense operators, cached
//!   eigendecompositions, Pauli strings, the transverse-field Ising chain and
//!   its states.
//! * [`contour`]: permutations, contour rank, η vectors and the expansion of a
//!   contour-time-ordered correlation into Wightman terms.
//! * [`correlation`], [`sweep`]: numerical evaluation and time sweeps.
//! * [`symmetry`]: symmetry transforms, parities, selection rules and theorem
//!   checks.
//! * [`cli`]: the `qnslab` command line.

pub mod cli;
pub mod contour;
pub mod correlation;
pub mod error;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod random;
pub mod spectral;
pub mod sweep;
pub mod symmetry;

pub use contour::{expand_ctoc, enumerate_ranks, EtaVector, ExpansionTerm, Permutation, Sign, TimeMode};
pub use correlation::{CtocSpec, Evaluator, ObservableSet, WightmanSpec};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use operator::{DensityMatrix, QuantumOperator};
pub use spectral::SpectralCache;
pub use sweep::{Grid, SweepResult, SweepTemplate, TimeExpr};
pub use symmetry::{SymmetryKind, SymmetryTransform, TheoremReport};
