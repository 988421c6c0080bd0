//! Operator families `{A_n}`, finite-support forcing, state samples and the
//! evolution operator `Φ(m, n)`.
//!
//! A family is stored as an explicit window `[window_lo, window_hi)` of
//! matrices plus two constant tails: `A_n = tail_minus` for `n < window_lo`
//! and `A_n = tail_plus` for `n ≥ window_hi`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mat::{identity, op_norm, Matrix, Vector};

pub const DEFAULT_INV_TOL_REL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct OperatorSequence {
    dim: usize,
    window_lo: i64,
    window_hi: i64,
    matrices: Vec<Matrix>,
    tail_minus: Matrix,
    tail_plus: Matrix,
    inverses: Vec<Matrix>,
    tail_minus_inv: Matrix,
    tail_plus_inv: Matrix,
}

fn checked_inverse(m: &Matrix, index: i64, inv_tol_rel: f64) -> Result<Matrix> {
    let sv = crate::mat::singular_values_desc(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(smax > 0.0 && smin > inv_tol_rel * smax) {
        return Err(Error::InversionFailure { index, ratio });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::InversionFailure { index, ratio })
}

impl OperatorSequence {
    pub fn new(
        window_lo: i64,
        window_hi: i64,
        matrices: Vec<Matrix>,
        tail_minus: Matrix,
        tail_plus: Matrix,
    ) -> Result<Self> {
        Self::with_inv_tol(
            window_lo,
            window_hi,
            matrices,
            tail_minus,
            tail_plus,
            DEFAULT_INV_TOL_REL,
        )
    }

    pub fn with_inv_tol(
        window_lo: i64,
        window_hi: i64,
        matrices: Vec<Matrix>,
        tail_minus: Matrix,
        tail_plus: Matrix,
        inv_tol_rel: f64,
    ) -> Result<Self> {
        if window_lo > 0 || window_hi < 0 {
            return Err(Error::InvalidSequence(format!(
                "window [{window_lo}, {window_hi}) must contain 0"
            )));
        }
        if matrices.len() as i64 != window_hi - window_lo {
            return Err(Error::InvalidSequence(format!(
                "window [{window_lo}, {window_hi}) needs {} matrices, got {}",
                window_hi - window_lo,
                matrices.len()
            )));
        }
        let dim = tail_plus.nrows();
        if dim == 0 {
            return Err(Error::InvalidSequence("dimension must be positive".into()));
        }
        for (what, m) in std::iter::once(("tail_plus", &tail_plus))
            .chain(std::iter::once(("tail_minus", &tail_minus)))
            .chain(matrices.iter().map(|m| ("window matrix", m)))
        {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "{what} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSequence(format!(
                    "{what} has non-finite entries"
                )));
            }
        }
        let inverses = matrices
            .iter()
            .enumerate()
            .map(|(i, m)| checked_inverse(m, window_lo + i as i64, inv_tol_rel))
            .collect::<Result<Vec<_>>>()?;
        let tail_minus_inv = checked_inverse(&tail_minus, window_lo - 1, inv_tol_rel)?;
        let tail_plus_inv = checked_inverse(&tail_plus, window_hi, inv_tol_rel)?;
        Ok(Self {
            dim,
            window_lo,
            window_hi,
            matrices,
            tail_minus,
            tail_plus,
            inverses,
            tail_minus_inv,
            tail_plus_inv,
        })
    }

    /// `A_n ≡ a` for every `n`.
    pub fn constant(a: Matrix) -> Result<Self> {
        Self::new(0, 0, Vec::new(), a.clone(), a)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window_lo(&self) -> i64 {
        self.window_lo
    }

    pub fn window_hi(&self) -> i64 {
        self.window_hi
    }

    pub fn window_matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn tail_minus(&self) -> &Matrix {
        &self.tail_minus
    }

    pub fn tail_plus(&self) -> &Matrix {
        &self.tail_plus
    }

    /// `A_n`.
    pub fn operator_at(&self, n: i64) -> &Matrix {
        if n < self.window_lo {
            &self.tail_minus
        } else if n >= self.window_hi {
            &self.tail_plus
        } else {
            &self.matrices[(n - self.window_lo) as usize]
        }
    }

    /// `A_n⁻¹`, computed once at construction.
    pub fn inverse_at(&self, n: i64) -> &Matrix {
        if n < self.window_lo {
            &self.tail_minus_inv
        } else if n >= self.window_hi {
            &self.tail_plus_inv
        } else {
            &self.inverses[(n - self.window_lo) as usize]
        }
    }

    /// `Φ(m, n)`: `A_{m−1}···A_n` for `m > n`, identity for `m = n` and
    /// `A_m⁻¹···A_{n−1}⁻¹ = Φ(n, m)⁻¹` for `m < n`.
    pub fn evolution(&self, m: i64, n: i64) -> Matrix {
        let mut out = identity(self.dim);
        if m > n {
            for j in n..m {
                out = self.operator_at(j) * out;
            }
        } else {
            for j in (m..n).rev() {
                out = self.inverse_at(j) * out;
            }
        }
        out
    }

    /// `U(n) = Φ(n, 0)`.
    pub fn u_of(&self, n: i64) -> Matrix {
        self.evolution(n, 0)
    }

    /// `U(n)⁻¹ = Φ(0, n)`.
    pub fn u_inv(&self, n: i64) -> Matrix {
        self.evolution(0, n)
    }

    /// `|||A||| = sup_n ‖A_n‖`, exact for a windowed family.
    pub fn sup_norm(&self) -> f64 {
        self.matrices
            .iter()
            .chain([&self.tail_minus, &self.tail_plus])
            .map(op_norm)
            .fold(0.0, f64::max)
    }

    /// `(Lx)(n) = x_{n+1} − A_n x_n` on the range of `x` shortened by one on the right.
    pub fn apply_l(&self, x: &StateSequence) -> Result<StateSequence> {
        if x.len() < 2 {
            return Err(Error::RangeTooShort(x.len()));
        }
        if x.dim() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "state dimension {} vs operator dimension {}",
                x.dim(),
                self.dim
            )));
        }
        let samples = x
            .samples
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let n = x.start + i as i64;
                &w[1] - self.operator_at(n) * &w[0]
            })
            .collect();
        StateSequence::new(self.dim, x.start, samples)
    }
}

/// Forcing `{h_n}` with finite support; unlisted indices are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSequence {
    dim: usize,
    entries: BTreeMap<i64, Vector>,
}

impl ForcingSequence {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Vector)>,
    {
        let mut h = Self::zero(dim);
        for (n, v) in entries {
            h.insert(n, v)?;
        }
        Ok(h)
    }

    pub fn insert(&mut self, n: i64, v: Vector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "forcing entry at n = {n} has length {}, expected {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSequence(format!(
                "forcing entry at n = {n} is not finite"
            )));
        }
        self.entries.insert(n, v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `h_n` (zero outside the support).
    pub fn at(&self, n: i64) -> Vector {
        self.entries
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Vector::zeros(self.dim))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Vector)> {
        self.entries.iter().map(|(&n, v)| (n, v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest listed index.
    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        let lo = *self.entries.keys().next()?;
        let hi = *self.entries.keys().next_back()?;
        Some((lo, hi))
    }

    /// `|||h||| = max_n ‖h_n‖`.
    pub fn sup_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|(&n, v)| (n, v * s)).collect(),
        }
    }
}

/// Samples `x_n` on a contiguous range `[start, start + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    dim: usize,
    start: i64,
    samples: Vec<Vector>,
}

impl StateSequence {
    pub fn new(dim: usize, start: i64, samples: Vec<Vector>) -> Result<Self> {
        if let Some(bad) = samples.iter().position(|v| v.len() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "sample {} has length {}, expected {dim}",
                start + bad as i64,
                samples[bad].len()
            )));
        }
        Ok(Self {
            dim,
            start,
            samples,
        })
    }

    pub fn zeros(dim: usize, lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1).max(0) as usize;
        Self {
            dim,
            start: lo,
            samples: vec![Vector::zeros(dim); len],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index (inclusive).
    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<&Vector> {
        if n < self.start {
            return None;
        }
        self.samples.get((n - self.start) as usize)
    }

    pub fn get_mut(&mut self, n: i64) -> Option<&mut Vector> {
        if n < self.start {
            return None;
        }
        self.samples.get_mut((n - self.start) as usize)
    }

    pub fn samples(&self) -> &[Vector] {
        &self.samples
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Vector)> {
        self.samples
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start + i as i64, v))
    }

    /// Restriction to `[lo, hi]`, which must lie inside the stored range.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        if lo < self.start || hi > self.end() || lo > hi {
            return Err(Error::RangeMismatch(format!(
                "[{lo}, {hi}] not inside [{}, {}]",
                self.start,
                self.end()
            )));
        }
        let a = (lo - self.start) as usize;
        let b = (hi - self.start) as usize;
        Ok(Self {
            dim: self.dim,
            start: lo,
            samples: self.samples[a..=b].to_vec(),
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn axpy(&mut self, alpha: f64, other: &StateSequence) -> Result<()> {
        if other.start != self.start || other.len() != self.len() {
            return Err(Error::RangeMismatch(format!(
                "[{}, {}] vs [{}, {}]",
                self.start,
                self.end(),
                other.start,
                other.end()
            )));
        }
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += b * alpha;
        }
        Ok(())
    }
}
