//! The matching operator `D = P − (I − Q)`, its Moore–Penrose inverse and the
//! kernel/cokernel bookkeeping used to classify the bounded-solution problem.
//!
//! In finite dimension `D` is always Fredholm with index 0, so
//! `dim ker D = dim coker D = dim − rank D`. What carries information is the
//! pair `r = rank(P·P_{N(D)})` (size of the bounded homogeneous family) and
//! `d = rank(P_{N(D*)}·Q)` (number of independent solvability conditions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{idempotency_defect, identity, op_norm, range_basis, rank_abs, svd, Matrix};

pub const DEFAULT_RANK_TOL_REL: f64 = 1e-10;

/// Tolerance for accepting an input projector as idempotent, relative to `1 + ‖P‖²`.
pub const IDEMPOTENT_TOL_REL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GeneralizedInverse {
    pub d_matrix: Matrix,
    pub d_pinv: Matrix,
    /// Orthogonal projector onto `N(D)`.
    pub proj_ker: Matrix,
    /// Orthogonal projector onto `N(D*)`.
    pub proj_coker: Matrix,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub rank_tol: f64,
    pub rank_tol_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub r: usize,
    pub d: usize,
    pub index: i64,
    pub trichotomy: bool,
    pub dichotomy_on_z: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Commutation {
    pub commutator_norm: f64,
    pub pq_eq_q: bool,
    pub pq_eq_p: bool,
}

fn check_square_pair(p: &Matrix, q: &Matrix) -> Result<()> {
    if !p.is_square() || !q.is_square() || p.shape() != q.shape() {
        return Err(Error::ShapeMismatch(format!(
            "P is {:?}, Q is {:?}",
            p.shape(),
            q.shape()
        )));
    }
    Ok(())
}

/// `D = P − (I − Q)`.
pub fn build_d(p: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_square_pair(p, q)?;
    for (name, m) in [("P", p), ("Q", q)] {
        let defect = idempotency_defect(m);
        if defect > IDEMPOTENT_TOL_REL * (1.0 + op_norm(m).powi(2)) {
            return Err(Error::NotIdempotent { name, defect });
        }
    }
    Ok(p - (identity(p.nrows()) - q))
}

/// Moore–Penrose inverse through the SVD, dropping singular values at or
/// below `rank_tol_rel · max(σ_max, 1)`. The floor keeps a matrix that is
/// zero up to rounding from being inverted at the noise level.
pub fn pseudo_inverse(m: &Matrix, rank_tol_rel: f64) -> Result<GeneralizedInverse> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "expected a square matrix, got {:?}",
            m.shape()
        )));
    }
    let n = m.nrows();
    let dec = svd(m);
    let rank_tol = rank_tol_rel * dec.max().max(1.0);
    let mut d_pinv = Matrix::zeros(n, n);
    let mut rank = 0;
    for (i, &s) in dec.s.iter().enumerate() {
        if s > rank_tol && s > 0.0 {
            rank += 1;
            d_pinv += dec.v_t.row(i).transpose() * dec.u.column(i).transpose() / s;
        }
    }
    let eye = identity(n);
    let proj_ker = &eye - &d_pinv * m;
    let proj_coker = &eye - m * &d_pinv;
    Ok(GeneralizedInverse {
        d_matrix: m.clone(),
        d_pinv,
        proj_ker: symmetrize(proj_ker),
        proj_coker: symmetrize(proj_coker),
        singular_values: dec.s.clone(),
        rank,
        rank_tol,
        rank_tol_rel,
    })
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

impl GeneralizedInverse {
    pub fn dim(&self) -> usize {
        self.d_matrix.nrows()
    }

    /// Maximum of the four Moore–Penrose defects, each relative to `1 + ‖·‖`.
    pub fn penrose_defect(&self) -> f64 {
        let d = &self.d_matrix;
        let dp = &self.d_pinv;
        let dd = d * dp;
        let pd = dp * d;
        let a = op_norm(&(&dd * d - d)) / (1.0 + op_norm(d));
        let b = op_norm(&(&pd * dp - dp)) / (1.0 + op_norm(dp));
        let c = op_norm(&(&dd - dd.transpose())) / (1.0 + op_norm(&dd));
        let e = op_norm(&(&pd - pd.transpose())) / (1.0 + op_norm(&pd));
        a.max(b).max(c).max(e)
    }
}

/// Rank threshold for products of projectors: relative to the product of
/// the factors' norms, so rounding noise in an exactly-zero product is not
/// counted.
fn product_rank(a: &Matrix, b: &Matrix, rank_tol_rel: f64) -> usize {
    rank_abs(&(a * b), product_tol(a, b, rank_tol_rel))
}

fn product_tol(a: &Matrix, b: &Matrix, rank_tol_rel: f64) -> f64 {
    rank_tol_rel * (1.0 + op_norm(a) * op_norm(b))
}

/// Orthonormal basis (columns) of `range(P·P_{N(D)})`, the initial values of
/// the bounded homogeneous solutions. Its column count equals `r`.
pub fn homogeneous_basis(gi: &GeneralizedInverse, p: &Matrix) -> Matrix {
    let tol = product_tol(p, &gi.proj_ker, gi.rank_tol_rel);
    range_basis(&(p * &gi.proj_ker), tol)
}

/// Default tolerance for the commutation flags, relative to `1 + ‖P‖‖Q‖`.
pub fn commutation_tol(p: &Matrix, q: &Matrix) -> f64 {
    1e-10 * (1.0 + op_norm(p) * op_norm(q))
}

pub fn check_commutation(p: &Matrix, q: &Matrix, tol: f64) -> Result<Commutation> {
    check_square_pair(p, q)?;
    let pq = p * q;
    Ok(Commutation {
        commutator_norm: op_norm(&(&pq - q * p)),
        pq_eq_q: op_norm(&(&pq - q)) <= tol,
        pq_eq_p: op_norm(&(&pq - p)) <= tol,
    })
}

pub fn classify(gi: &GeneralizedInverse, p: &Matrix, q: &Matrix) -> Result<Classification> {
    check_square_pair(p, q)?;
    if p.nrows() != gi.dim() {
        return Err(Error::ShapeMismatch(format!(
            "projectors are {}x{}, D is {}x{}",
            p.nrows(),
            p.nrows(),
            gi.dim(),
            gi.dim()
        )));
    }
    let dim = gi.dim();
    let rank_tol_rel = gi.rank_tol_rel;
    let dim_ker = dim - gi.rank;
    let dim_coker = dim - gi.rank;
    let r = product_rank(p, &gi.proj_ker, rank_tol_rel);
    let d = product_rank(&gi.proj_coker, q, rank_tol_rel);
    let tol = commutation_tol(p, q);
    let c = check_commutation(p, q, tol)?;
    let commuting = c.commutator_norm <= tol;
    Ok(Classification {
        dim_ker,
        dim_coker,
        r,
        d,
        index: dim_ker as i64 - dim_coker as i64,
        trichotomy: commuting && c.pq_eq_q,
        dichotomy_on_z: commuting && c.pq_eq_q && c.pq_eq_p,
    })
}

/// `‖D³ − D‖`; zero whenever `P` and `Q` commute.
pub fn verify_involution(d: &Matrix) -> f64 {
    op_norm(&(d * d * d - d))
}
