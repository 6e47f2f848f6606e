//! Small dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenpairs of the Hermitian part `(M + M^dagger)/2`, eigenvalues non-increasing.
///
/// Column `j` of the returned matrix is the eigenvector for `values[j]`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = hermitize(m);
    let eig = SymmetricEigen::new(herm);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    let herm = hermitize(m);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_hermitian_two_by_two() {
        // [[0.75, 0.25], [0.25, 0.25]]: lambda = (1 +- sqrt(0.5)) / 2
        let m = CMatrix::from_row_slice(2, 2, &[c(0.75, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        let s = 0.5f64.sqrt();
        assert!((vals[0] - (1.0 + s) / 2.0).abs() < 1e-14);
        assert!((vals[1] - (1.0 - s) / 2.0).abs() < 1e-14);
        let recon = &vecs * CMatrix::from_diagonal(&CVector::from_iterator(2, vals.iter().map(|&v| c(v, 0.0)))) * vecs.adjoint();
        assert!(max_abs_diff(&recon, &m) < 1e-14);
    }

    #[test]
    fn eigen_of_complex_hermitian() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5, 0.0), c(0.1, 0.2), c(0.0, -0.1),
                c(0.1, -0.2), c(0.3, 0.0), c(0.05, 0.05),
                c(0.0, 0.1), c(0.05, -0.05), c(0.2, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        for j in 0..3 {
            let v = vecs.column(j).into_owned();
            let mv = &m * &v;
            let lv = v.scale(vals[j]);
            assert!((mv - lv).norm() < 1e-13);
        }
    }
}
