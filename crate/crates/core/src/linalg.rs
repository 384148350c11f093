//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

/// Singular values (descending) and the matching right singular vectors of
/// `a`, with `a` zero-padded to at least as many rows as columns so that the
/// full right null space is available.
pub(crate) struct RightSingular {
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: DMatrix<f64>,
}

pub(crate) fn right_singular(a: &DMatrix<f64>) -> RightSingular {
    let cols = a.ncols();
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, a.nrows()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut vectors = DMatrix::zeros(cols, order.len());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v_t.row(src).transpose());
    }
    RightSingular { values, vectors }
}

impl RightSingular {
    /// Right singular vector of the `k`-th smallest singular value (0 = smallest).
    pub fn smallest(&self, k: usize) -> DVector<f64> {
        self.vectors.column(self.values.len() - 1 - k).into_owned()
    }
}

/// Sorted SVD of a 3x3 matrix: `m = u * diag(s) * v^T` with `s` descending.
pub(crate) struct Svd3 {
    pub u: Matrix3<f64>,
    pub s: Vector3<f64>,
    pub v: Matrix3<f64>,
}

pub(crate) fn svd3(m: &Matrix3<f64>) -> Svd3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V^T").transpose();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = Svd3 {
        u: Matrix3::zeros(),
        s: Vector3::zeros(),
        v: Matrix3::zeros(),
    };
    for (dst, &src) in order.iter().enumerate() {
        out.u.set_column(dst, &u.column(src));
        out.v.set_column(dst, &v.column(src));
        out.s[dst] = svd.singular_values[src];
    }
    out
}

pub(crate) fn mat3_from_row_major(v: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&v[..9])
}
