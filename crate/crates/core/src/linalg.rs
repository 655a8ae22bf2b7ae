//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative factor in the numerical-rank rule `s_k > max(rows, cols) * s_max * RANK_RTOL`.
pub const RANK_RTOL: f64 = 1e-12;

/// Singular values in descending order together with a full set of right
/// singular vectors (columns of the returned `cols x cols` matrix, same order).
pub(crate) fn full_right_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut m = DMatrix::zeros(cols, cols);
        m.view_mut((0, 0), (rows, cols)).copy_from(a);
        m
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(cols, cols);
    for (k, &i) in order.iter().enumerate() {
        v.set_column(k, &v_t.row(i).transpose());
    }
    (values, v)
}

pub(crate) fn rank_from_singular_values(values: &[f64], rows: usize, cols: usize) -> usize {
    let s_max = values.iter().copied().fold(0.0_f64, f64::max);
    if s_max == 0.0 {
        return 0;
    }
    let threshold = rows.max(cols) as f64 * s_max * RANK_RTOL;
    values.iter().filter(|&&s| s > threshold).count()
}

/// Numerical rank of an arbitrary matrix under the crate-wide threshold rule.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let values = a.singular_values();
    rank_from_singular_values(values.as_slice(), a.nrows(), a.ncols())
}

/// Minimum-norm least-squares solution of `a x = b` and the residual norm.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    if a.ncols() == 0 {
        return (DVector::zeros(0), b.norm());
    }
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let eps = a.nrows().max(a.ncols()) as f64 * s_max * RANK_RTOL;
    let x = svd
        .solve(b, eps.max(f64::MIN_POSITIVE))
        .expect("both singular vector sets computed");
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Ratio of the extreme nonzero singular values, used in LP diagnostics.
pub(crate) fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 1.0;
    }
    let values = a.singular_values();
    let s_max = values.max();
    let rank = rank_from_singular_values(values.as_slice(), a.nrows(), a.ncols());
    if rank == 0 {
        return f64::INFINITY;
    }
    let mut sorted: Vec<f64> = values.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    s_max / sorted[rank - 1]
}

pub(crate) fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    a.select_columns(cols.iter())
}
