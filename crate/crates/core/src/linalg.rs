//! Small dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry of `m - m^T`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Counts of (negative, near-zero, positive) eigenvalues of a symmetric
/// matrix; near-zero means below `rel_tol` times the spectral radius.
pub fn signature(m: &DMatrix<f64>, rel_tol: f64) -> (usize, usize, usize) {
    let (values, _) = sym_eigen(m);
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cut = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut sig = (0, 0, 0);
    for v in values {
        if v.abs() <= cut {
            sig.1 += 1;
        } else if v < 0.0 {
            sig.0 += 1;
        } else {
            sig.2 += 1;
        }
    }
    sig
}

/// Singular values (descending) and right singular vectors as matching
/// columns. Wide inputs are padded with zero rows so that the full set of
/// right singular vectors is returned.
pub fn svd_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v_t.row(src).transpose());
    }
    (values, vectors)
}

/// Orthonormal nullspace basis: right singular vectors whose singular value
/// is at most `rel_tol * sigma_max`.
pub struct Nullspace {
    pub basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Nullspace {
    let (values, vectors) = svd_sorted(m);
    let smax = values.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * smax;
    let null_cols: Vec<usize> = (0..values.len()).filter(|&i| values[i] <= threshold).collect();
    let mut basis = DMatrix::zeros(m.ncols(), null_cols.len());
    for (dst, &src) in null_cols.iter().enumerate() {
        basis.set_column(dst, &vectors.column(src));
    }
    Nullspace {
        basis,
        singular_values: values,
        threshold,
    }
}

/// Minimum-norm least-squares solution of `m x = rhs`, discarding singular
/// values below `rel_tol * sigma_max`.
pub fn lstsq(m: &DMatrix<f64>, rhs: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let eps = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Monic characteristic polynomial coefficients, highest degree first,
/// via the Faddeev-LeVerrier recursion.
pub fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let ident = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        mk = m * (&mk + &ident * coeffs[k - 1]);
        coeffs[k] = -mk.trace() / k as f64;
    }
    coeffs
}

pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn unit(v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let p = char_poly(&m);
        let expected = [1.0, -6.0, 11.0, -6.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let ns = nullspace(&m, 1e-10);
        assert_eq!(ns.basis.ncols(), 2);
        assert!((&m * &ns.basis).amax() < 1e-12);
    }

    #[test]
    fn signature_counts() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 0.0, 5.0, 1.0]));
        assert_eq!(signature(&m, 1e-10), (1, 1, 2));
    }
}
