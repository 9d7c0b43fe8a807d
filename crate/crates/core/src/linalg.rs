//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector, Matrix6};

/// Default relative threshold for rank decisions, `σ_k > tol · σ_max`.
pub const DEFAULT_SIGMA_TOL: f64 = 1e-9;

/// `‖a − b‖_F / ‖b‖_F`, or the absolute norm when `b` is zero.
pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn rel_frobenius6(a: &Matrix6<f64>, b: &Matrix6<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(0.0) => 0,
        Some(&smax) => s.iter().filter(|&&x| x > rel_tol * smax).count(),
    }
}

pub fn rank6(m: &Matrix6<f64>, rel_tol: f64) -> usize {
    rank(&DMatrix::from_iterator(6, 6, m.iter().copied()), rel_tol)
}

/// Largest `|m − mᵀ|` entry relative to the largest `|m|` entry.
pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).amax() / scale
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues and eigenvectors (columns) sorted by ascending eigenvalue.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = symmetrize(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn to_dmatrix6(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(6, 6, m.iter().copied())
}

pub fn to_matrix6(m: &DMatrix<f64>) -> Matrix6<f64> {
    assert_eq!(m.shape(), (6, 6), "expected a 6×6 matrix");
    Matrix6::from_iterator(m.iter().copied())
}
