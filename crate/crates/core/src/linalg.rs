//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complexify(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn complexify_vec(v: &DVector<f64>) -> CVector {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(a: &CMatrix) -> DMatrix<f64> {
    a.map(|z| z.re)
}

pub fn imag_part(a: &CMatrix) -> DMatrix<f64> {
    a.map(|z| z.im)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_c(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest entry of |A - Aᵀ|.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    max_abs(&(a - a.transpose()))
}

pub fn asymmetry_c(a: &CMatrix) -> f64 {
    max_abs_c(&(a - a.transpose()))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn symmetrize_c(a: &CMatrix) -> CMatrix {
    (a + a.transpose()) * Complex64::new(0.5, 0.0)
}

/// Index of the first component whose magnitude is within a relative 1e-12 of the maximum.
pub fn dominant_index<T: Copy>(v: &[T], abs: impl Fn(T) -> f64) -> usize {
    let max = v.iter().fold(0.0f64, |m, &x| m.max(abs(x)));
    v.iter()
        .position(|&x| abs(x) >= max * (1.0 - 1e-12))
        .unwrap_or(0)
}

/// Eigen-decomposition of a real symmetric matrix with ascending eigenvalues and
/// eigenvectors sign-fixed so their largest-magnitude component is positive.
pub fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let k = dominant_index(v.as_slice(), f64::abs);
        if v[k] < 0.0 {
            v = -v;
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(a).iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = symmetrize(a).symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse, refusing matrices whose condition number exceeds `max_condition`.
pub fn checked_inverse(a: &CMatrix, max_condition: f64) -> Result<CMatrix, f64> {
    let cond = condition_number(a);
    if !(cond < max_condition) {
        return Err(cond);
    }
    a.clone().try_inverse().ok_or(f64::INFINITY)
}

/// Bilinear (non-conjugating) dot product.
pub fn dot(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn frobenius_c(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
