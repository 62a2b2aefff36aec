//! Small dense helpers on `[f64]` slices.
//!
//! Everything heavier than a dot product (SVD, symmetric eigensolvers) goes
//! through `nalgebra`.

use nalgebra::DMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Removes the components of `v` along the orthonormal `basis`, two passes.
pub fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            axpy(-c, q, v);
        }
    }
}

/// Column matrix whose columns are `vectors` (all of length `rows`).
pub fn column_matrix(vectors: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, vectors.len(), |r, c| vectors[c][r])
}

/// Singular values of the column matrix of `vectors`, descending.
pub fn singular_values(vectors: &[Vec<f64>]) -> Vec<f64> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let rows = vectors[0].len();
    let m = column_matrix(vectors, rows);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    // a tall matrix has min(rows, cols) singular values; pad so the count is
    // always the number of vectors
    s.resize(vectors.len(), 0.0);
    s
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Spectral norm of a symmetric matrix.
pub fn sym_op_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn project_out_leaves_orthogonal_residual() {
        let basis = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let mut v = vec![3.0, -2.0, 5.0];
        project_out(&mut v, &basis);
        assert_eq!(v, vec![0.0, 0.0, 5.0]);
    }

    #[test]
    fn singular_values_pad_for_wide_input() {
        let s = singular_values(&[vec![1.0], vec![2.0]]);
        assert_eq!(s.len(), 2);
        assert!((s[0] - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(s[1], 0.0);
    }
}
