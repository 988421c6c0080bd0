//! Small dense helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Thin singular value decomposition `m = u·diag(s)·v_t` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v_t: Matrix,
}

/// Computed with faer; panics only on non-finite input, which every caller
/// rules out beforehand.
pub fn svd(m: &Matrix) -> Svd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd {
            u: Matrix::zeros(r, 0),
            s: Vec::new(),
            v_t: Matrix::zeros(0, c),
        };
    }
    let fm = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = fm.thin_svd().expect("SVD of a finite matrix converges");
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]));
    Svd {
        u: Matrix::from_fn(r, k, |i, j| fu[(i, order[j])]),
        s: order.iter().map(|&j| fs[j]).collect(),
        v_t: Matrix::from_fn(k, c, |i, j| fv[(j, order[i])]),
    }
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Minimal-norm least-squares solution, ignoring singular values at or
    /// below `abs_tol`.
    pub fn solve(&self, b: &Vector, abs_tol: f64) -> Vector {
        let mut x = Vector::zeros(self.v_t.ncols());
        for (i, &s) in self.s.iter().enumerate() {
            if s > abs_tol {
                let coef = self.u.column(i).dot(b) / s;
                x += self.v_t.row(i).transpose() * coef;
            }
        }
        x
    }

    /// Left singular vectors with singular value above `abs_tol`, as columns.
    pub fn range(&self, abs_tol: f64) -> Matrix {
        let keep = self.s.iter().take_while(|&&s| s > abs_tol).count();
        self.u.columns(0, keep).into_owned()
    }
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &Matrix) -> f64 {
    svd(m).max()
}

/// Singular values in descending order.
pub fn singular_values_desc(m: &Matrix) -> Vec<f64> {
    svd(m).s
}

/// Number of singular values strictly above `abs_tol`.
pub fn rank_abs(m: &Matrix, abs_tol: f64) -> usize {
    svd(m).s.iter().filter(|&&s| s > abs_tol).count()
}

/// Orthonormal basis (as columns) of the range of `m`, keeping left singular
/// vectors whose singular value exceeds `abs_tol`.
pub fn range_basis(m: &Matrix, abs_tol: f64) -> Matrix {
    svd(m).range(abs_tol)
}

/// `‖M² − M‖`.
pub fn idempotency_defect(m: &Matrix) -> f64 {
    op_norm(&(m * m - m))
}

pub fn symmetry_defect(m: &Matrix) -> f64 {
    op_norm(&(m - m.transpose()))
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

/// Builds a matrix from row-major nested rows. Returns `None` when rows are ragged.
pub fn from_rows(rows: &[Vec<f64>]) -> Option<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
