//! Dense complex matrix helpers shared by every module.
//!
//! Matrices are nalgebra column-major `DMatrix<Complex64>`. Products go through
//! `matrixmultiply::zgemm`, which is considerably faster than nalgebra's generic
//! complex product for the 2^N sizes used here.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `a · b` for conformable complex matrices.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is `#[repr(C)] { re, im }`, layout-identical to [f64; 2].
    // All three buffers are contiguous column-major with the strides given, and
    // `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `Tr[a · b]` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for j in 0..a.ncols() {
        // column j of a against row j of b
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().copied().sum()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// max |a − b| entrywise.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// max |M − M†|.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// (M + M†)/2.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// max |[a, b]| entrywise.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs_diff(&matmul(a, b), &matmul(b, a))
}

pub fn conjugate(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, n: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(m, n, |i, j| {
            Complex64::new((seed + i as f64 * 0.7 - j as f64 * 0.3).sin(), (seed * j as f64 + 0.1 * i as f64).cos())
        })
    }

    #[test]
    fn zgemm_matches_nalgebra_product() {
        for (m, k, n) in [(1, 1, 1), (2, 3, 4), (8, 8, 8), (5, 2, 7)] {
            let a = sample(m, k, 0.4);
            let b = sample(k, n, 1.3);
            let reference = &a * &b;
            assert!(max_abs_diff(&matmul(&a, &b), &reference) < 1e-13);
        }
    }

    #[test]
    fn trace_of_product_matches_explicit() {
        let a = sample(6, 6, 0.2);
        let b = sample(6, 6, 2.2);
        let explicit = trace(&matmul(&a, &b));
        assert!((trace_of_product(&a, &b) - explicit).norm() < 1e-13);
    }

    #[test]
    fn hermitian_part_is_hermitian() {
        let a = sample(4, 4, 0.9);
        assert!(hermiticity_residual(&a) > 0.1);
        assert_eq!(hermiticity_residual(&hermitian_part(&a)), 0.0);
    }
}
