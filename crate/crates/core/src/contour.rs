//! Combinatorics of correlation labels.
//!
//! A Wightman label σ stands for Tr[B_{σ(n)} ··· B_{σ(1)} ρ], with B_i the
//! operator at the i-th earliest time. Reading the string from ρ outwards gives
//! the chronological sequence σ(1), σ(2), …, σ(n): the order in which a time
//! contour visits the operators. The contour rank is the number of local maxima
//! of that sequence after padding both ends with 0 (ρ sits at the earliest
//! time), i.e. the number of forward/backward branch pairs the contour needs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted by exhaustive enumeration (8! = 40320).
pub const MAX_ENUMERATION_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' | '−' => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A permutation of 1..=n in one-line notation, `images[i-1] = σ(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PermutationRepr", into = "String")]
pub struct Permutation {
    images: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PermutationRepr {
    Text(String),
    Images(Vec<usize>),
}

impl TryFrom<PermutationRepr> for Permutation {
    type Error = Error;

    fn try_from(repr: PermutationRepr) -> Result<Self> {
        match repr {
            PermutationRepr::Text(s) => s.parse(),
            PermutationRepr::Images(v) => Permutation::new(v),
        }
    }
}

impl From<Permutation> for String {
    fn from(p: Permutation) -> String {
        p.to_string()
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!("{images:?}: image {v} outside 1..={n}")));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("{images:?}: image {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (1..=n).collect() }
    }

    /// Every permutation of 1..=n in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (1..=n).permutations(n).map(|images| Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// σ(i), 1-based.
    pub fn get(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// Operator indices as they appear in the trace, left to right: σ(n) … σ(1).
    pub fn trace_label(&self) -> String {
        let rev: Vec<usize> = self.images.iter().rev().copied().collect();
        join_indices(&rev)
    }

    /// σ̃(i) = σ(n − i + 1).
    pub fn reversed(&self) -> Permutation {
        Permutation { images: self.images.iter().rev().copied().collect() }
    }

    /// Number of local maxima of the 0-padded chronological reading.
    pub fn rank(&self) -> usize {
        let s = &self.images;
        let n = s.len();
        (0..n)
            .filter(|&i| {
                let left = if i == 0 { 0 } else { s[i - 1] };
                let right = if i + 1 == n { 0 } else { s[i + 1] };
                s[i] > left && s[i] > right
            })
            .count()
    }

    pub fn is_contour_ordered(&self) -> bool {
        self.rank() == 1
    }

    /// Operators present before the first turning point and after the last one.
    pub fn branch_occupancy(&self) -> BranchOccupancy {
        let s = &self.images;
        let n = s.len();
        if n == 1 {
            // a lone operator sits at the turning point of the only contour and
            // is counted on the first forward branch
            return BranchOccupancy { first_forward: true, last_backward: false };
        }
        BranchOccupancy { first_forward: s[0] < s[1], last_backward: s[n - 2] > s[n - 1] }
    }

    /// Label under the C-transform: the reversed order σ̃.
    pub fn c_transform(&self) -> Permutation {
        self.reversed()
    }

    /// Canonical label of W^{σ̃}({t → −t}): σ′(i) = n + 1 − σ(n + 1 − i), with
    /// times mapped by [`TimeReflection`].
    pub fn t_transform(&self) -> LabelMap {
        let n = self.len();
        let images = (1..=n).map(|i| n + 1 - self.get(n + 1 - i)).collect();
        LabelMap { sigma: Permutation { images }, times: TimeReflection }
    }

    /// Canonical label of W^{σ}({t → −t}): σ′(i) = n + 1 − σ(i), with times
    /// mapped by [`TimeReflection`].
    pub fn s_transform(&self) -> LabelMap {
        let n = self.len();
        let images = self.images.iter().map(|&v| n + 1 - v).collect();
        LabelMap { sigma: Permutation { images }, times: TimeReflection }
    }

    /// Change of contour rank under the T or S label map.
    ///
    /// Exactly one of {first forward, last backward} branch occupied → 0, both → +1,
    /// neither → −1. The prediction is the same for both modes.
    pub fn predict_rank_delta(&self, _mode: TimeMode) -> i32 {
        let occ = self.branch_occupancy();
        match (occ.first_forward, occ.last_backward) {
            (true, true) => 1,
            (false, false) => -1,
            _ => 0,
        }
    }
}

fn join_indices(v: &[usize]) -> String {
    if v.iter().all(|&x| x < 10) {
        v.iter().map(|x| x.to_string()).collect()
    } else {
        v.iter().map(|x| x.to_string()).join(",")
    }
}

impl fmt::Display for Permutation {
    /// One-line notation σ(1)σ(2)…σ(n); comma-separated once n ≥ 10.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_indices(&self.images))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parsed: std::result::Result<Vec<usize>, _> = if s.contains(|c: char| c == ',' || c.is_whitespace()) {
            s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(str::parse).collect()
        } else {
            s.chars().map(|c| c.to_string().parse()).collect()
        };
        let images = parsed.map_err(|_| Error::InvalidPermutation(format!("cannot parse `{s}`")))?;
        Permutation::new(images)
    }
}

/// Which time-negating symmetry a label map belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeMode {
    T,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchOccupancy {
    pub first_forward: bool,
    pub last_backward: bool,
}

/// Time relabelling t′_i = −t_{n+1−i}: negates and restores ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeReflection;

impl TimeReflection {
    pub fn apply(&self, times: &[f64]) -> Vec<f64> {
        times.iter().rev().map(|t| -t).collect()
    }
}

/// Canonical relabelling produced by a T or S transform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    pub sigma: Permutation,
    pub times: TimeReflection,
}

/// Signature (η₁, …, η_n) of nested superoperators; η_n is always `+`.
///
/// Written as text in the conventional superscript order η_n … η₁, so `"+-"` is
/// η₁ = −, η₂ = +.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EtaVector {
    signs: Vec<Sign>,
}

impl TryFrom<String> for EtaVector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EtaVector> for String {
    fn from(e: EtaVector) -> String {
        e.to_string()
    }
}

impl EtaVector {
    /// Signs in index order η₁ … η_n.
    pub fn new(signs: Vec<Sign>) -> Result<Self> {
        match signs.last() {
            None => Err(Error::InvalidEta("empty".into())),
            Some(Sign::Minus) => Err(Error::InvalidEta("the outermost sign must be +".into())),
            Some(Sign::Plus) => Ok(Self { signs }),
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// η_j, 1-based.
    pub fn get(&self, j: usize) -> Sign {
        self.signs[j - 1]
    }

    pub fn product(&self) -> i8 {
        self.signs.iter().map(|s| s.value()).product()
    }

    /// All 2^{n−1} signatures of order n.
    pub fn all(n: usize) -> impl Iterator<Item = EtaVector> {
        let inner = n.saturating_sub(1);
        (0..(1usize << inner)).map(move |mask| {
            let mut signs: Vec<Sign> = (0..inner).map(|j| if mask >> j & 1 == 1 { Sign::Minus } else { Sign::Plus }).collect();
            signs.push(Sign::Plus);
            EtaVector { signs }
        })
    }
}

impl fmt::Display for EtaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.signs.iter().rev() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for EtaVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut signs = Vec::new();
        for c in s.trim().chars() {
            signs.push(Sign::from_char(c).ok_or_else(|| Error::InvalidEta(format!("unexpected character `{c}` in `{s}`")))?);
        }
        signs.reverse();
        EtaVector::new(signs)
    }
}

/// One Wightman term of a CTOC: `coeff · W^{sigma}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub sigma: Permutation,
    pub coeff: Complex64,
}

/// Expands C^η_n into the Wightman basis.
///
/// Each inner superoperator B_j^{η_j} either multiplies its operand from the
/// left (factor −i for `−`, ½ for `+`) or from the right (+i for `−`, ½ for `+`).
/// The outer B_n^+ collapses to a plain left product under the trace. The
/// resulting string is B_n · (left-chosen, latest first) · ρ · (right-chosen,
/// earliest first), whose label is: left-chosen ascending, then n, then
/// right-chosen descending.
pub fn expand_ctoc(eta: &EtaVector) -> Vec<ExpansionTerm> {
    let n = eta.len();
    let inner = n - 1;
    (0..(1usize << inner))
        .map(|mask| {
            let mut coeff = Complex64::new(1.0, 0.0);
            let mut left = Vec::new();
            let mut right = Vec::new();
            for j in 1..=inner {
                let to_right = mask >> (j - 1) & 1 == 1;
                let factor = match (eta.get(j), to_right) {
                    (Sign::Plus, _) => Complex64::new(0.5, 0.0),
                    (Sign::Minus, false) => Complex64::new(0.0, -1.0),
                    (Sign::Minus, true) => Complex64::new(0.0, 1.0),
                };
                coeff *= factor;
                if to_right {
                    right.push(j);
                } else {
                    left.push(j);
                }
            }
            let mut images = left;
            images.push(n);
            images.extend(right.into_iter().rev());
            ExpansionTerm { sigma: Permutation { images }, coeff }
        })
        .collect()
}

/// Number of permutations of each contour rank at a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankHistogram {
    pub n: usize,
    pub counts: BTreeMap<usize, u64>,
}

impl RankHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, rank: usize) -> u64 {
        self.counts.get(&rank).copied().unwrap_or(0)
    }
}

pub fn enumerate_ranks(n: usize) -> Result<RankHistogram> {
    if n == 0 || n > MAX_ENUMERATION_ORDER {
        return Err(Error::OrderOutOfRange { n, max: MAX_ENUMERATION_ORDER });
    }
    let mut counts = BTreeMap::new();
    for sigma in Permutation::all(n) {
        *counts.entry(sigma.rank()).or_insert(0) += 1;
    }
    Ok(RankHistogram { n, counts })
}
