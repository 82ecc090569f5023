//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Matrices here are small (channels x channels) and must decompose
//! deterministically: eigenpairs come back sorted by descending eigenvalue,
//! each eigenvector sign-canonicalized (first non-negligible entry positive),
//! and exact eigenvalue ties ordered lexicographically by eigenvector.

use crate::mat::Mat;
use crate::scalar::{lit, Scalar};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns,
/// ordered as described in the module docs.
pub fn sorted_symmetric_eigen<T: Scalar>(m: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let mut a = m.clone();
    let mut v: Mat<T> = Mat::identity(n);

    let scale: T = a
        .as_slice()
        .iter()
        .map(|&x| x * x)
        .sum::<T>()
        .sqrt()
        .max(T::min_positive_value());
    let tol = T::epsilon() * scale;

    for _ in 0..MAX_SWEEPS {
        let off: T = off_diag_norm(&a);
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol * lit(1e-3) {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (lit::<T>(2.0) * apq);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let eigvals: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();

    // canonical sign before ordering so ties sort deterministically
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| v.col(j)).collect();
    for col in &mut cols {
        canonicalize_sign(col);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        match eigvals[j].partial_cmp(&eigvals[i]).unwrap() {
            std::cmp::Ordering::Equal => lex_cmp(&cols[i], &cols[j]),
            other => other,
        }
    });

    let sorted_vals: Vec<T> = order.iter().map(|&i| eigvals[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| cols[order[j]][i]);
    (sorted_vals, vecs)
}

fn off_diag_norm<T: Scalar>(a: &Mat<T>) -> T {
    let n = a.nrows();
    let mut sum = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[(i, j)] * a[(i, j)];
        }
    }
    (sum + sum).sqrt()
}

fn rotate<T: Scalar>(a: &mut Mat<T>, v: &mut Mat<T>, p: usize, q: usize, c: T, s: T) {
    let n = a.nrows();
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = c * aip - s * aiq;
        a[(i, q)] = s * aip + c * aiq;
    }
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = c * apj - s * aqj;
        a[(q, j)] = s * apj + c * aqj;
    }
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = c * vip - s * viq;
        v[(i, q)] = s * vip + c * viq;
    }
}

fn canonicalize_sign<T: Scalar>(col: &mut [T]) {
    let maxabs = col.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if maxabs == T::zero() {
        return;
    }
    let thresh = maxabs * T::epsilon().sqrt();
    if let Some(&lead) = col.iter().find(|x| x.abs() > thresh) {
        if lead < T::zero() {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
    }
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (&x, &y) in a.iter().zip(b) {
        match x.partial_cmp(&y).unwrap() {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn reconstruct_residual(m: &Mat<f64>, vals: &[f64], vecs: &Mat<f64>) -> f64 {
        let n = m.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let mv: f64 = (0..n).map(|k| m[(i, k)] * vecs[(k, j)]).sum();
                worst = worst.max((mv - vals[j] * vecs[(i, j)]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two_analytic() {
        let m: Mat<f64> = Mat::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = sorted_symmetric_eigen(&m);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[(0, 0)] - inv_sqrt2).abs() < 1e-12);
        assert!((vecs[(1, 0)] - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn identity_has_deterministic_tie_order() {
        let m: Mat<f64> = Mat::identity(3);
        let (vals, vecs1) = sorted_symmetric_eigen(&m);
        let (_, vecs2) = sorted_symmetric_eigen(&m);
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
        assert_eq!(vecs1, vecs2);
    }

    #[test]
    fn random_symmetric_eigen_residuals() {
        let mut r = rng::seeded(21);
        for n in [3usize, 8, 17] {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x: f64 = r.random_range(-1.0..1.0);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            let (vals, vecs) = sorted_symmetric_eigen(&m);
            assert!(reconstruct_residual(&m, &vals, &vecs) < 1e-9);
            // orthonormality
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n).map(|i| vecs[(i, a)] * vecs[(i, b)]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-9);
                }
            }
            // descending order
            for w in vals.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }
}
