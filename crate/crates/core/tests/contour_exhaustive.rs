//! Exhaustive checks of the permutation/contour combinatorics for small n.

use std::collections::BTreeSet;

use qnslab::contour::{enumerate_ranks, expand_ctoc, EtaVector, Permutation, TimeMode, TimeReflection};

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Local maxima counted directly on the padded word 0, s₁, …, s_n, 0.
fn rank_oracle(sigma: &Permutation) -> usize {
    let mut padded = vec![0];
    padded.extend_from_slice(sigma.images());
    padded.push(0);
    padded.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

#[test]
fn rank_histogram_counts() {
    for n in 1..=6 {
        let hist = enumerate_ranks(n).unwrap();
        assert_eq!(hist.total(), factorial(n), "n = {n}");
        assert_eq!(hist.count(1), 1 << (n - 1), "n = {n}");
        assert_eq!(hist.total() - hist.count(1), factorial(n) - (1 << (n - 1)));
    }
}

#[test]
fn rank_matches_padded_word_oracle() {
    for n in 1..=6 {
        for sigma in Permutation::all(n) {
            assert_eq!(sigma.rank(), rank_oracle(&sigma), "{sigma}");
        }
    }
}

#[test]
fn rank_one_is_unimodal() {
    // rank 1 ⇔ the reading rises to n and then falls
    for n in 1..=6 {
        for sigma in Permutation::all(n) {
            let s = sigma.images();
            let peak = s.iter().position(|&v| v == n).unwrap();
            let unimodal = s[..=peak].windows(2).all(|w| w[0] < w[1]) && s[peak..].windows(2).all(|w| w[0] > w[1]);
            assert_eq!(sigma.is_contour_ordered(), unimodal, "{sigma}");
        }
    }
}

#[test]
fn expansion_covers_rank_one_exactly() {
    for n in 1..=5 {
        let rank_one: BTreeSet<Permutation> = Permutation::all(n).filter(|s| s.rank() == 1).collect();
        for eta in EtaVector::all(n) {
            let terms = expand_ctoc(&eta);
            let perms: BTreeSet<Permutation> = terms.iter().map(|t| t.sigma.clone()).collect();
            assert_eq!(perms.len(), terms.len(), "duplicate terms for {eta}");
            assert_eq!(perms, rank_one, "eta {eta}");
            let minus = eta.signs().iter().filter(|s| s.value() < 0).count();
            for t in &terms {
                // each − contributes ±i, each + contributes ½
                let modulus = 0.5f64.powi((n - 1 - minus) as i32);
                assert!((t.coeff.norm() - modulus).abs() < 1e-15, "{eta} {}", t.sigma);
            }
        }
    }
}

#[test]
fn reversal_preserves_rank() {
    for n in 1..=6 {
        for sigma in Permutation::all(n) {
            assert_eq!(sigma.reversed().rank(), sigma.rank(), "{sigma}");
        }
    }
}

#[test]
fn rank_delta_prediction_is_exact() {
    for n in 1..=6 {
        for sigma in Permutation::all(n) {
            for (mode, mapped) in [(TimeMode::T, sigma.t_transform()), (TimeMode::S, sigma.s_transform())] {
                let delta = mapped.sigma.rank() as i32 - sigma.rank() as i32;
                assert_eq!(delta, sigma.predict_rank_delta(mode), "{sigma} under {mode:?}");
            }
        }
    }
}

#[test]
fn label_maps_are_involutions() {
    let times = [-0.3, 0.4, 1.1, 2.5, 2.6, 9.0];
    for n in 1..=6 {
        let t = &times[..n];
        let twice = TimeReflection.apply(&TimeReflection.apply(t));
        assert_eq!(twice, t);
        for sigma in Permutation::all(n) {
            assert_eq!(sigma.t_transform().sigma.t_transform().sigma, sigma);
            assert_eq!(sigma.s_transform().sigma.s_transform().sigma, sigma);
        }
    }
}

#[test]
fn known_ranks() {
    let rank = |s: &str| s.parse::<Permutation>().unwrap().rank();
    assert_eq!(rank("14532"), 1);
    assert_eq!(rank("51324"), 3);
    assert_eq!(rank("123"), 1);
    assert_eq!(rank("213"), 2);
    assert_eq!(rank("1"), 1);
}

#[test]
fn enumeration_guard() {
    assert!(enumerate_ranks(8).is_ok());
    assert!(enumerate_ranks(9).is_err());
    assert!(enumerate_ranks(0).is_err());
}
