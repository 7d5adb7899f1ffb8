//! Small complex linear-algebra helpers shared across modules.
//!
//! Everything here works on dynamically sized `nalgebra` matrices with
//! `Complex<f64>` entries. Matrices are column-major, so `vec_col` (column
//! stacking) is a plain copy of the backing storage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;
pub type RMat = DMatrix<f64>;

/// `(m + m*)/2`, forcing exact Hermitian symmetry before a factorization.
pub fn hermitize(m: &CMat) -> CMat {
    let half = Complex64::new(0.5, 0.0);
    (m + m.adjoint()) * half
}

/// Hermitian eigendecomposition with eigenvalues sorted in decreasing order.
/// Returns `(eigenvalues, eigenvectors)`; columns of the unitary factor match
/// the eigenvalue order.
pub fn eigh_desc(m: &CMat) -> (RVec, CMat) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = RVec::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn spectral_norm_hermitian(m: &CMat) -> f64 {
    let (vals, _) = eigh_desc(m);
    vals.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Column-stacking vec operator.
pub fn vec_col(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Promote a real matrix to a complex one.
pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Reassemble `u diag(vals) u*` from an eigendecomposition.
pub fn from_eig(u: &CMat, vals: &RVec) -> CMat {
    let n = u.nrows();
    let mut scaled = u.clone();
    for j in 0..n {
        let s = Complex64::new(vals[j], 0.0);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * u.adjoint()
}
