//! Dense helpers on top of nalgebra: sorted SVD, null spaces and the
//! canonical sign convention used for every homogeneous vector.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Entries smaller than this fraction of the norm are skipped when fixing signs.
const SIGN_TOL: f64 = 1e-12;

/// Scales `v` to unit norm and makes its first significant entry positive.
/// Returns `false` (leaving `v` untouched) for the zero vector.
pub fn canonicalize(v: &mut [f64]) -> bool {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm.is_nan() || norm <= f64::MIN_POSITIVE || !norm.is_finite() {
        return false;
    }
    let mut scale = 1.0 / norm;
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_TOL * norm) {
        if *first < 0.0 {
            scale = -scale;
        }
    }
    v.iter_mut().for_each(|x| *x *= scale);
    true
}

/// Distance between two unit vectors modulo sign.
pub fn projective_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut plus, mut minus) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        plus += (x - y) * (x - y);
        minus += (x + y) * (x + y);
    }
    libm::sqrt(plus.min(minus))
}

/// Singular values in descending order with the matching right singular
/// vectors as columns. Wide matrices are padded with zero rows so the full
/// right basis is always returned.
pub fn right_singular(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let cols = a.ncols();
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(cols, cols);
    for (k, &i) in order.iter().enumerate() {
        v.set_column(k, &v_t.row(i).transpose());
    }
    (values, v)
}

/// Numerical rank at relative tolerance `tol`.
pub fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let (sv, _) = right_singular(a);
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > tol * top && s > 0.0).count()
}

/// Orthonormal basis of the right null space, one canonical column per direction.
pub fn nullspace(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (sv, v) = right_singular(a);
    let top = sv.first().copied().unwrap_or(0.0);
    let null: Vec<usize> = (0..sv.len()).filter(|&i| sv[i].is_nan() || sv[i] <= tol * top).collect();
    let mut basis = DMatrix::zeros(a.ncols(), null.len());
    for (k, &i) in null.iter().enumerate() {
        let mut col: DVector<f64> = v.column(i).into_owned();
        canonicalize(col.as_mut_slice());
        basis.set_column(k, &col);
    }
    basis
}

/// Orthonormal basis of the column space, canonical sign per column.
pub fn column_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (sv, v) = right_singular(&a.transpose());
    let top = sv.first().copied().unwrap_or(0.0);
    let r = sv.iter().filter(|&&s| s > tol * top && s > 0.0).count();
    let mut basis = DMatrix::zeros(a.nrows(), r);
    for k in 0..r {
        let mut col: DVector<f64> = v.column(k).into_owned();
        canonicalize(col.as_mut_slice());
        basis.set_column(k, &col);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sign_and_norm() {
        let mut v = [0.0, -3.0, 4.0];
        assert!(canonicalize(&mut v));
        assert!(v[0] == 0.0 && (v[1] - 0.6).abs() < 1e-15 && (v[2] + 0.8).abs() < 1e-15);
        let mut z = [0.0; 3];
        assert!(!canonicalize(&mut z));
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let n = nullspace(&a, RANK_TOL);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-14);
        assert!((n.transpose() * &n - DMatrix::identity(2, 2)).norm() < 1e-14);
        assert_eq!(rank(&a, RANK_TOL), 2);
    }

    #[test]
    fn column_space_is_orthonormal() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 1.0]);
        let q = column_space(&a, RANK_TOL);
        assert_eq!(q.ncols(), 2);
        let proj = &q * q.transpose();
        assert!((&proj * &a - &a).norm() < 1e-13);
    }
}
