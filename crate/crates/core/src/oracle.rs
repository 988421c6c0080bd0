//! Brute-force reference solver.
//!
//! Solves `x_{n+1} − A_n x_n = h_n` on `[−N, N]` as one stacked linear system,
//! with boundedness imposed as subspace conditions at the two ends:
//! `x_N ∈ range P(N)` and `x_{−N} ∈ ker Q(−N)`. Once the forcing and the
//! window are inside `(−N, N)` these conditions are exact, so the truncated
//! solution set coincides with the restriction of the bounded solutions on
//! `ℤ`. Nothing here touches `D`, its inverse, or the Green's kernel.

use crate::dichotomy::{projector_field, Axis};
use crate::error::{Error, Result};
use crate::linsys::{ForcingSequence, OperatorSequence, StateSequence};
use crate::mat::{identity, svd, Matrix, Vector};

/// Relative singular-value cutoff of the stacked least-squares solve.
pub const ORACLE_RANK_TOL_REL: f64 = 1e-10;

/// Feasibility threshold on the least-squares residual, relative to `1 + |||h|||`.
pub const INFEASIBLE_TOL_REL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TruncatedProblem {
    pub seq: OperatorSequence,
    pub h: ForcingSequence,
    pub half_width: i64,
    /// `U(N)·P·U(N)⁻¹`.
    pub p_at_n: Matrix,
    /// `U(−N)·Q·U(−N)⁻¹`.
    pub q_at_minus_n: Matrix,
}

impl TruncatedProblem {
    /// Builds the boundary projectors from the tails' spectral splitting.
    pub fn new(
        seq: OperatorSequence,
        h: ForcingSequence,
        half_width: i64,
        gap_tol: f64,
    ) -> Result<Self> {
        let (plus, _) = projector_field(&seq, Axis::Plus, gap_tol)?;
        let (minus, _) = projector_field(&seq, Axis::Minus, gap_tol)?;
        let p_at_n = plus.at(&seq, half_width).into_owned();
        let q_at_minus_n = minus.at(&seq, -half_width).into_owned();
        Self::with_projectors(seq, h, half_width, p_at_n, q_at_minus_n)
    }

    pub fn with_projectors(
        seq: OperatorSequence,
        h: ForcingSequence,
        half_width: i64,
        p_at_n: Matrix,
        q_at_minus_n: Matrix,
    ) -> Result<Self> {
        let n = half_width;
        if h.dim() != seq.dim() {
            return Err(Error::ShapeMismatch(format!(
                "forcing dimension {} vs system dimension {}",
                h.dim(),
                seq.dim()
            )));
        }
        if !(seq.window_lo() > -n && seq.window_hi() < n) {
            return Err(Error::RangeMismatch(format!(
                "operator window [{}, {}] not inside (−{n}, {n})",
                seq.window_lo(),
                seq.window_hi()
            )));
        }
        if let Some((lo, hi)) = h.support_bounds() {
            if !(lo > -n && hi < n - 1) {
                return Err(Error::RangeMismatch(format!(
                    "forcing support [{lo}, {hi}] not inside (−{n}, {})",
                    n - 1
                )));
            }
        }
        Ok(Self {
            seq,
            h,
            half_width,
            p_at_n,
            q_at_minus_n,
        })
    }
}

/// Minimal-norm least-squares solution of the stacked truncated problem.
pub fn truncated_bounded_solve(p: &TruncatedProblem) -> Result<StateSequence> {
    let d = p.seq.dim();
    let n = p.half_width;
    let blocks = (2 * n + 1) as usize;
    let rows = (2 * n as usize) * d + 2 * d;
    let cols = blocks * d;
    let mut m = Matrix::zeros(rows, cols);
    let mut b = Vector::zeros(rows);
    let eye = identity(d);
    let col = |k: i64| ((k + n) as usize) * d;

    for (i, k) in (-n..n).enumerate() {
        let r0 = i * d;
        m.view_mut((r0, col(k)), (d, d))
            .copy_from(&(-p.seq.operator_at(k)));
        m.view_mut((r0, col(k + 1)), (d, d)).copy_from(&eye);
        b.rows_mut(r0, d).copy_from(&p.h.at(k));
    }
    let r0 = 2 * n as usize * d;
    m.view_mut((r0, col(n)), (d, d))
        .copy_from(&(&eye - &p.p_at_n));
    m.view_mut((r0 + d, col(-n)), (d, d))
        .copy_from(&p.q_at_minus_n);

    let dec = svd(&m);
    let threshold = INFEASIBLE_TOL_REL * (1.0 + p.h.sup_norm());
    let x = dec.solve(&b, ORACLE_RANK_TOL_REL * dec.max());
    let residual = (&m * &x - &b).norm();
    if residual > threshold {
        return Err(Error::InfeasibleTruncation {
            residual,
            threshold,
        });
    }
    let samples = (0..blocks).map(|i| x.rows(i * d, d).into_owned()).collect();
    StateSequence::new(d, -n, samples)
}

/// `min_c max_n ‖x_n − y_n − Σ_j c_j basis_j(n)‖`, with `c` from least squares
/// on the stacked samples.
pub fn compare_mod_family(
    x: &StateSequence,
    y: &StateSequence,
    basis: &[StateSequence],
) -> Result<f64> {
    let same =
        |a: &StateSequence| a.start() == x.start() && a.len() == x.len() && a.dim() == x.dim();
    if !same(y) || !basis.iter().all(same) {
        return Err(Error::RangeMismatch(format!(
            "sequences must share the range [{}, {}]",
            x.start(),
            x.end()
        )));
    }
    let d = x.dim();
    let len = x.len() * d;
    let stack = |s: &StateSequence| {
        Vector::from_iterator(len, s.samples().iter().flat_map(|v| v.iter().copied()))
    };
    let mut e = stack(x) - stack(y);
    if !basis.is_empty() {
        let mut bm = Matrix::zeros(len, basis.len());
        for (j, s) in basis.iter().enumerate() {
            bm.set_column(j, &stack(s));
        }
        let dec = svd(&bm);
        let c = dec.solve(&e, 1e-12 * dec.max());
        e -= &bm * c;
    }
    Ok((0..x.len())
        .map(|i| e.rows(i * d, d).norm())
        .fold(0.0, f64::max))
}
