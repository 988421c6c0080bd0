//! Exponential-dichotomy data on the two semi-axes.
//!
//! For an eventually-constant family the dichotomy projector at time 0 is the
//! spectral projector of the tail matrix onto its stable invariant subspace
//! (eigenvalues inside the unit disk), transported to time 0 through the
//! explicit window. `P` lives on `ℤ₊` (built from `tail_plus`), `Q` on `ℤ₋`
//! (built from `tail_minus`).
//!
//! The same transported projectors are used to evaluate `Φ(n, m)P(m)` and
//! `Φ(n, m)(I − P(m))` stably: every propagation step re-applies the projector
//! at the new time, so rounding errors in the growing directions are removed
//! before they can be amplified.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::OperatorSequence;
use crate::mat::{identity, op_norm, Matrix, Vector};
use crate::par::{self, Exec};

pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Slack allowed on the violation ratio before a certificate is rejected.
pub const VERIFY_SLACK: f64 = 1e-12;

const SIGN_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Plus,
    Minus,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Plus => "plus",
            Axis::Minus => "minus",
        }
    }
}

/// Stable/unstable splitting of a constant tail matrix.
#[derive(Debug, Clone)]
pub struct TailSplit {
    /// Spectral projector onto the stable invariant subspace along the unstable one.
    pub projector: Matrix,
    /// Largest modulus among stable eigenvalues (0 if none).
    pub stable_rate: f64,
    /// Largest `1/|μ|` among unstable eigenvalues (0 if none).
    pub unstable_rate: f64,
}

impl TailSplit {
    pub fn rate(&self) -> f64 {
        self.stable_rate.max(self.unstable_rate)
    }
}

/// Matrix sign function by scaled Newton iteration.
fn matrix_sign(c: &Matrix) -> Option<Matrix> {
    let n = c.nrows() as f64;
    let mut x = c.clone();
    for it in 0..SIGN_MAX_ITERS {
        let inv = x.clone().try_inverse()?;
        // determinant scaling for the first steps, plain Newton near convergence
        let mu = if it < 10 {
            let det = x.determinant().abs();
            if det > 0.0 && det.is_finite() {
                det.powf(-1.0 / n)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let next = (&x * mu + inv / mu) * 0.5;
        let delta = (&next - &x).norm();
        let scale = next.norm();
        x = next;
        if delta <= 1e-14 * scale {
            break;
        }
    }
    Some(x)
}

/// Splits `a` into stable and unstable invariant subspaces.
///
/// The spectral projector comes from the sign function of the Cayley transform
/// `(A + I)(A − I)⁻¹`, which maps the open unit disk to the open left half-plane.
pub fn split_tail(a: &Matrix, gap_tol: f64, axis: Axis) -> Result<TailSplit> {
    let dim = a.nrows();
    let eig = a.complex_eigenvalues();
    let mut stable_rate: f64 = 0.0;
    let mut unstable_rate: f64 = 0.0;
    for mu in eig.iter() {
        let r = mu.norm();
        if (r - 1.0).abs() < gap_tol {
            return Err(Error::UnitCircleEigenvalue {
                axis: axis.name(),
                re: mu.re,
                im: mu.im,
            });
        }
        if r < 1.0 {
            stable_rate = stable_rate.max(r);
        } else {
            unstable_rate = unstable_rate.max(1.0 / r);
        }
    }
    let eye = identity(dim);
    let shifted = (a - &eye)
        .try_inverse()
        .ok_or(Error::UnitCircleEigenvalue {
            axis: axis.name(),
            re: 1.0,
            im: 0.0,
        })?;
    let cayley = (a + &eye) * shifted;
    let sign = matrix_sign(&cayley).ok_or(Error::UnitCircleEigenvalue {
        axis: axis.name(),
        re: f64::NAN,
        im: f64::NAN,
    })?;
    let mut p = (&eye - sign) * 0.5;
    // idempotent polish
    for _ in 0..2 {
        let p2 = &p * &p;
        p = &p2 * 3.0 - &p2 * &p * 2.0;
    }
    Ok(TailSplit {
        projector: p,
        stable_rate,
        unstable_rate,
    })
}

/// Dichotomy projectors along one semi-axis, one per time step.
///
/// `at(n)` is `U(n)·P·U(n)⁻¹` (resp. with `Q`). Inside the explicit window the
/// projectors are stored; beyond it, in the direction of the tail that defined
/// them, they are constant.
#[derive(Debug, Clone)]
pub struct ProjectorField {
    axis: Axis,
    /// First stored index.
    lo: i64,
    stored: Vec<Matrix>,
    /// Whether the projector commutes with the tail past the stored range.
    frozen_tail: bool,
}

fn commutes_with(p: &Matrix, a: &Matrix) -> bool {
    op_norm(&(p * a - a * p)) <= 1e-8 * (1.0 + op_norm(p)) * (1.0 + op_norm(a))
}

impl ProjectorField {
    /// Builds the field from the spectral projector of the tail, transported
    /// across the window.
    pub fn from_tail(seq: &OperatorSequence, axis: Axis, tail_projector: Matrix) -> Self {
        match axis {
            Axis::Plus => {
                let (lo, hi) = (seq.window_lo().min(0), seq.window_hi());
                let mut stored = vec![Matrix::zeros(0, 0); (hi - lo + 1) as usize];
                stored[(hi - lo) as usize] = tail_projector;
                for n in (lo..hi).rev() {
                    let next = &stored[(n + 1 - lo) as usize];
                    stored[(n - lo) as usize] = seq.inverse_at(n) * next * seq.operator_at(n);
                }
                Self {
                    axis,
                    lo,
                    stored,
                    frozen_tail: true,
                }
            }
            Axis::Minus => {
                let (lo, hi) = (seq.window_lo(), seq.window_hi().max(0));
                let mut stored = vec![Matrix::zeros(0, 0); (hi - lo + 1) as usize];
                stored[0] = tail_projector;
                for n in lo + 1..=hi {
                    let prev = &stored[(n - 1 - lo) as usize];
                    stored[(n - lo) as usize] =
                        seq.operator_at(n - 1) * prev * seq.inverse_at(n - 1);
                }
                Self {
                    axis,
                    lo,
                    stored,
                    frozen_tail: true,
                }
            }
        }
    }

    /// Builds the field from a projector given at time 0 (e.g. a certificate).
    ///
    /// The projector is transported through the window to the tail; if it
    /// commutes with the tail there, it is held constant beyond.
    pub fn from_anchor(seq: &OperatorSequence, axis: Axis, anchor: &Matrix) -> Self {
        let (lo, hi) = (seq.window_lo(), seq.window_hi());
        let mut stored = vec![Matrix::zeros(0, 0); (hi - lo + 1) as usize];
        stored[(-lo) as usize] = anchor.clone();
        for n in 0..hi {
            let cur = &stored[(n - lo) as usize];
            stored[(n + 1 - lo) as usize] = seq.operator_at(n) * cur * seq.inverse_at(n);
        }
        for n in (lo..0).rev() {
            let next = &stored[(n + 1 - lo) as usize];
            stored[(n - lo) as usize] = seq.inverse_at(n) * next * seq.operator_at(n);
        }
        let frozen_tail = match axis {
            Axis::Plus => commutes_with(&stored[(hi - lo) as usize], seq.tail_plus()),
            Axis::Minus => commutes_with(&stored[0], seq.tail_minus()),
        };
        Self {
            axis,
            lo,
            stored,
            frozen_tail,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    fn hi(&self) -> i64 {
        self.lo + self.stored.len() as i64 - 1
    }

    /// Projector at time `n`.
    pub fn at(&self, seq: &OperatorSequence, n: i64) -> Cow<'_, Matrix> {
        let (lo, hi) = (self.lo, self.hi());
        if (lo..=hi).contains(&n) {
            return Cow::Borrowed(&self.stored[(n - lo) as usize]);
        }
        let toward_tail = match self.axis {
            Axis::Plus => n > hi,
            Axis::Minus => n < lo,
        };
        if toward_tail && self.frozen_tail {
            return Cow::Borrowed(if n > hi {
                self.stored.last().unwrap()
            } else {
                &self.stored[0]
            });
        }
        let mut p = if n > hi {
            self.stored.last().unwrap().clone()
        } else {
            self.stored[0].clone()
        };
        if n > hi {
            for j in hi..n {
                p = seq.operator_at(j) * p * seq.inverse_at(j);
            }
        } else {
            for j in (n..lo).rev() {
                p = seq.inverse_at(j) * p * seq.operator_at(j);
            }
        }
        Cow::Owned(p)
    }

    /// Projector at time 0.
    pub fn anchor(&self, seq: &OperatorSequence) -> Matrix {
        self.at(seq, 0).into_owned()
    }

    /// `Φ(to, from)·P(from)·x` for `to ≥ from`, re-projecting at each step.
    pub fn push_range(&self, seq: &OperatorSequence, from: i64, to: i64, x: &Matrix) -> Matrix {
        debug_assert!(to >= from);
        let mut v = self.at(seq, from).as_ref() * x;
        for j in from..to {
            v = self.at(seq, j + 1).as_ref() * (seq.operator_at(j) * v);
        }
        v
    }

    /// `Φ(to, from)·(I − P(from))·x` for `to ≤ from`, re-projecting at each step.
    pub fn pull_kernel(&self, seq: &OperatorSequence, from: i64, to: i64, x: &Matrix) -> Matrix {
        debug_assert!(to <= from);
        let eye = identity(seq.dim());
        let mut v = (&eye - self.at(seq, from).as_ref()) * x;
        for j in (to..from).rev() {
            v = (&eye - self.at(seq, j).as_ref()) * (seq.inverse_at(j) * v);
        }
        v
    }

    pub fn push_range_vec(&self, seq: &OperatorSequence, from: i64, to: i64, x: &Vector) -> Vector {
        col(&self.push_range(seq, from, to, &as_mat(x)))
    }

    pub fn pull_kernel_vec(
        &self,
        seq: &OperatorSequence,
        from: i64,
        to: i64,
        x: &Vector,
    ) -> Vector {
        col(&self.pull_kernel(seq, from, to, &as_mat(x)))
    }
}

fn as_mat(v: &Vector) -> Matrix {
    Matrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn col(m: &Matrix) -> Vector {
    m.column(0).into_owned()
}

/// `P` at time 0: range is `Φ(0, window_hi)`·(stable subspace of `tail_plus`).
pub fn compute_projector_plus(seq: &OperatorSequence, gap_tol: f64) -> Result<Matrix> {
    Ok(projector_field(seq, Axis::Plus, gap_tol)?.0.anchor(seq))
}

/// `Q` at time 0: range is `Φ(0, window_lo)`·(stable subspace of `tail_minus`).
pub fn compute_projector_minus(seq: &OperatorSequence, gap_tol: f64) -> Result<Matrix> {
    Ok(projector_field(seq, Axis::Minus, gap_tol)?.0.anchor(seq))
}

/// Projector field and tail splitting for one semi-axis.
pub fn projector_field(
    seq: &OperatorSequence,
    axis: Axis,
    gap_tol: f64,
) -> Result<(ProjectorField, TailSplit)> {
    let tail = match axis {
        Axis::Plus => seq.tail_plus(),
        Axis::Minus => seq.tail_minus(),
    };
    let split = split_tail(tail, gap_tol, axis)?;
    let field = ProjectorField::from_tail(seq, axis, split.projector.clone());
    Ok((field, split))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyCertificate {
    pub axis: Axis,
    /// `P` (plus) or `Q` (minus), anchored at time 0.
    pub projector: Vec<Vec<f64>>,
    pub k: f64,
    pub lambda: f64,
    pub verified_window: (i64, i64),
}

impl DichotomyCertificate {
    pub fn projector_matrix(&self) -> Matrix {
        crate::mat::from_rows(&self.projector).unwrap_or_else(|| Matrix::zeros(0, 0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub window: (i64, i64),
    /// `max ‖·‖ / (k λ^{|n−m|})` over both inequalities; `≤ 1` means verified.
    pub max_ratio: f64,
    pub verified: bool,
    /// Smallest `k` that works with the certificate's `λ` on this window.
    pub k_for_lambda: f64,
    /// Smallest `λ` that works with `k = 1` off the diagonal.
    pub lambda_fit: f64,
    pub k_fit: f64,
}

/// `(|n − m|, norm)` for every ordered pair in the window, covering both
/// inequalities.
fn dichotomy_norms(
    seq: &OperatorSequence,
    field: &ProjectorField,
    lo: i64,
    hi: i64,
    exec: Exec,
) -> Vec<(i64, f64)> {
    let per_m = par::map_range(exec, lo, hi, |m| {
        let eye = identity(seq.dim());
        let mut out = Vec::with_capacity((hi - lo + 2) as usize);
        // n ≥ m: Φ(n, m)P(m)
        let mut cur = field.at(seq, m).into_owned();
        out.push((0, op_norm(&cur)));
        for n in m + 1..=hi {
            cur = field.at(seq, n).as_ref() * (seq.operator_at(n - 1) * cur);
            out.push((n - m, op_norm(&cur)));
        }
        // n ≤ m: Φ(n, m)(I − P(m))
        let mut cur = &eye - field.at(seq, m).as_ref();
        out.push((0, op_norm(&cur)));
        for n in (lo..m).rev() {
            cur = (&eye - field.at(seq, n).as_ref()) * (seq.inverse_at(n) * cur);
            out.push((m - n, op_norm(&cur)));
        }
        out
    });
    per_m.into_iter().flatten().collect()
}

struct Fit {
    max_ratio: f64,
    k_for_lambda: f64,
    lambda_fit: f64,
    k_fit: f64,
}

fn fit(norms: &[(i64, f64)], k: f64, lambda: f64) -> Fit {
    let mut k_for_lambda: f64 = 0.0;
    let mut lambda_fit: f64 = 0.0;
    for &(d, v) in norms {
        k_for_lambda = k_for_lambda.max(v / lambda.powi(d as i32));
        if d > 0 && v > 0.0 {
            lambda_fit = lambda_fit.max(v.powf(1.0 / d as f64));
        }
    }
    let k_fit = norms
        .iter()
        .map(|&(d, v)| {
            if v == 0.0 {
                0.0
            } else if lambda_fit > 0.0 {
                v / lambda_fit.powi(d as i32)
            } else {
                v
            }
        })
        .fold(0.0, f64::max);
    Fit {
        max_ratio: k_for_lambda / k,
        k_for_lambda,
        lambda_fit,
        k_fit,
    }
}

fn check_window(axis: Axis, lo: i64, hi: i64) -> Result<()> {
    let ok = lo <= hi
        && match axis {
            Axis::Plus => lo >= 0,
            Axis::Minus => hi <= 0,
        };
    if ok {
        Ok(())
    } else {
        Err(Error::WrongAxis {
            axis: axis.name(),
            lo,
            hi,
        })
    }
}

/// Checks both dichotomy inequalities for every pair `m, n` in `window`.
pub fn verify_dichotomy(
    seq: &OperatorSequence,
    cert: &DichotomyCertificate,
    window: (i64, i64),
    exec: Exec,
) -> Result<VerificationReport> {
    let (lo, hi) = window;
    check_window(cert.axis, lo, hi)?;
    let anchor = cert.projector_matrix();
    if anchor.nrows() != seq.dim() || anchor.ncols() != seq.dim() {
        return Err(Error::ShapeMismatch(format!(
            "certificate projector is {}x{}, system dimension is {}",
            anchor.nrows(),
            anchor.ncols(),
            seq.dim()
        )));
    }
    let field = ProjectorField::from_anchor(seq, cert.axis, &anchor);
    let norms = dichotomy_norms(seq, &field, lo, hi, exec);
    let f = fit(&norms, cert.k, cert.lambda);
    Ok(VerificationReport {
        window,
        max_ratio: f.max_ratio,
        verified: f.max_ratio <= 1.0 + VERIFY_SLACK,
        k_for_lambda: f.k_for_lambda,
        lambda_fit: f.lambda_fit,
        k_fit: f.k_fit,
    })
}

/// Builds the projector for `axis` and the tightest certificate over `window`.
///
/// `λ` is the `k = 1` rate when that is below 1; otherwise (transient growth
/// inside the window) `λ` is set midway between the tail's spectral rate and 1
/// and `k` absorbs the transient.
pub fn certify(
    seq: &OperatorSequence,
    axis: Axis,
    gap_tol: f64,
    window: (i64, i64),
    exec: Exec,
) -> Result<(DichotomyCertificate, VerificationReport)> {
    let (lo, hi) = window;
    check_window(axis, lo, hi)?;
    let (field, split) = projector_field(seq, axis, gap_tol)?;
    let norms = dichotomy_norms(seq, &field, lo, hi, exec);
    let probe = fit(&norms, 1.0, 0.5);
    let lambda = if probe.lambda_fit < 1.0 {
        probe.lambda_fit.max(f64::MIN_POSITIVE.sqrt())
    } else {
        0.5 * (1.0 + split.rate())
    };
    if lambda.is_nan() || lambda >= 1.0 {
        return Err(Error::NoCertificate {
            axis: axis.name(),
            lambda,
        });
    }
    let k = fit(&norms, 1.0, lambda).k_for_lambda.max(1.0);
    let cert = DichotomyCertificate {
        axis,
        projector: crate::mat::to_rows(&field.anchor(seq)),
        k,
        lambda,
        verified_window: window,
    };
    let report = verify_dichotomy(seq, &cert, window, exec)?;
    Ok((cert, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::to_rows;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_row_slice(v))
    }

    fn saddle() -> OperatorSequence {
        OperatorSequence::constant(diag(&[0.5, 2.0])).unwrap()
    }

    fn resonant() -> OperatorSequence {
        OperatorSequence::new(0, 0, vec![], diag(&[0.5]), diag(&[2.0])).unwrap()
    }

    fn cert(axis: Axis, p: Matrix, k: f64, lambda: f64, w: (i64, i64)) -> DichotomyCertificate {
        DichotomyCertificate {
            axis,
            projector: to_rows(&p),
            k,
            lambda,
            verified_window: w,
        }
    }

    #[test]
    fn projector_examples() {
        let p = compute_projector_plus(&saddle(), DEFAULT_GAP_TOL).unwrap();
        assert!((p - diag(&[1.0, 0.0])).abs().max() < 1e-12);
        let q = compute_projector_minus(&saddle(), DEFAULT_GAP_TOL).unwrap();
        assert!((q - diag(&[1.0, 0.0])).abs().max() < 1e-12);

        assert!(
            compute_projector_plus(&resonant(), DEFAULT_GAP_TOL)
                .unwrap()
                .abs()
                .max()
                < 1e-12
        );
        let q = compute_projector_minus(&resonant(), DEFAULT_GAP_TOL).unwrap();
        assert!((q[(0, 0)] - 1.0).abs() < 1e-12);

        let contracting = OperatorSequence::constant(diag(&[0.5, 0.5])).unwrap();
        let p = compute_projector_plus(&contracting, DEFAULT_GAP_TOL).unwrap();
        assert!((p - identity(2)).abs().max() < 1e-12);

        let expanding = OperatorSequence::constant(diag(&[2.0, 2.0])).unwrap();
        let q = compute_projector_minus(&expanding, DEFAULT_GAP_TOL).unwrap();
        assert!(q.abs().max() < 1e-12);
    }

    #[test]
    fn unit_circle_is_an_error() {
        let seq = OperatorSequence::constant(identity(2)).unwrap();
        assert!(matches!(
            compute_projector_plus(&seq, DEFAULT_GAP_TOL),
            Err(Error::UnitCircleEigenvalue { .. })
        ));
        // rotation by 90 degrees: eigenvalues ±i
        let rot = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let seq = OperatorSequence::constant(rot).unwrap();
        assert!(matches!(
            compute_projector_minus(&seq, DEFAULT_GAP_TOL),
            Err(Error::UnitCircleEigenvalue { axis: "minus", .. })
        ));
    }

    #[test]
    fn oblique_tail_projector() {
        // eigenvalue 0.5 on (1, 0), eigenvalue 3 on (1, 1)
        let a = Matrix::from_row_slice(2, 2, &[0.5, 2.5, 0.0, 3.0]);
        let split = split_tail(&a, DEFAULT_GAP_TOL, Axis::Plus).unwrap();
        let p = &split.projector;
        let expected = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        assert!((p - expected).abs().max() < 1e-12);
        assert!((split.stable_rate - 0.5).abs() < 1e-12);
        assert!((split.unstable_rate - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_split() {
        // 0.5 * rotation (stable pair) ⊕ 2.0
        let a = Matrix::from_row_slice(3, 3, &[0.3, -0.4, 0.0, 0.4, 0.3, 0.0, 0.0, 0.0, 2.0]);
        let p = split_tail(&a, DEFAULT_GAP_TOL, Axis::Plus)
            .unwrap()
            .projector;
        assert!((p - diag(&[1.0, 1.0, 0.0])).abs().max() < 1e-12);
    }

    #[test]
    fn verify_examples() {
        let seq = saddle();
        let c = cert(Axis::Plus, diag(&[1.0, 0.0]), 1.0, 0.5, (0, 12));
        let r = verify_dichotomy(&seq, &c, (0, 12), Exec::Sequential).unwrap();
        assert!(r.verified);
        assert!((r.max_ratio - 1.0).abs() < 1e-12);

        let c = cert(Axis::Plus, diag(&[1.0, 0.0]), 1.0, 0.25, (0, 12));
        let r = verify_dichotomy(&seq, &c, (0, 12), Exec::Sequential).unwrap();
        assert!(!r.verified);
        assert!((r.max_ratio - 2f64.powi(12)).abs() < 1e-6);
        assert!((r.lambda_fit - 0.5).abs() < 1e-12);

        let c = cert(Axis::Plus, diag(&[0.0]), 1.0, 0.5, (0, 10));
        let r = verify_dichotomy(&resonant(), &c, (0, 10), Exec::Sequential).unwrap();
        assert!(r.verified);
    }

    #[test]
    fn wrong_axis_rejected() {
        let c = cert(Axis::Plus, diag(&[1.0, 0.0]), 1.0, 0.5, (0, 12));
        assert!(matches!(
            verify_dichotomy(&saddle(), &c, (-3, 2), Exec::Sequential),
            Err(Error::WrongAxis { .. })
        ));
        let c = cert(Axis::Minus, diag(&[1.0, 0.0]), 1.0, 0.5, (-12, 0));
        assert!(
            verify_dichotomy(&saddle(), &c, (-12, 0), Exec::Sequential)
                .unwrap()
                .verified
        );
        assert!(verify_dichotomy(&saddle(), &c, (0, 3), Exec::Sequential).is_err());
    }

    #[test]
    fn certify_fits_tight_constants() {
        let (c, r) = certify(
            &saddle(),
            Axis::Plus,
            DEFAULT_GAP_TOL,
            (0, 20),
            Exec::Parallel,
        )
        .unwrap();
        assert!(r.verified);
        assert!((c.lambda - 0.5).abs() < 1e-12);
        assert!((c.k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn certify_with_transient_window() {
        let shear = Matrix::from_row_slice(2, 2, &[1.0, 0.8, 0.0, 1.0]);
        let seq = OperatorSequence::new(
            -2,
            3,
            vec![shear.clone(); 5],
            diag(&[0.3, 4.0]),
            diag(&[0.6, 1.5]),
        )
        .unwrap();
        for (axis, w) in [(Axis::Plus, (0, 20)), (Axis::Minus, (-20, 0))] {
            let (c, r) = certify(&seq, axis, DEFAULT_GAP_TOL, w, Exec::Parallel).unwrap();
            assert!(r.verified, "{axis:?}: {r:?}");
            assert!(c.k >= 1.0 && c.lambda > 0.0 && c.lambda < 1.0);
        }
    }

    #[test]
    fn transported_projector_commutes_with_tail() {
        let seq = OperatorSequence::new(
            -1,
            2,
            vec![
                Matrix::from_row_slice(2, 2, &[1.1, 0.2, -0.1, 0.9]),
                Matrix::from_row_slice(2, 2, &[1.0, -0.3, 0.2, 1.05]),
                Matrix::from_row_slice(2, 2, &[0.95, 0.1, 0.1, 1.0]),
            ],
            Matrix::from_row_slice(2, 2, &[0.4, 1.0, 0.0, 2.5]),
            Matrix::from_row_slice(2, 2, &[0.7, 0.0, 0.6, 1.8]),
        )
        .unwrap();
        let p = compute_projector_plus(&seq, DEFAULT_GAP_TOL).unwrap();
        let hi = seq.window_hi();
        let moved = seq.evolution(hi, 0) * &p * seq.evolution(0, hi);
        let t = seq.tail_plus();
        assert!(op_norm(&(&moved * t - t * &moved)) <= 1e-8);
        assert!(crate::mat::idempotency_defect(&p) <= 1e-10 * (1.0 + op_norm(&p).powi(2)));
    }

    #[test]
    fn both_exec_modes_agree() {
        let seq = saddle();
        let c = cert(Axis::Plus, diag(&[1.0, 0.0]), 1.0, 0.5, (0, 15));
        let a = verify_dichotomy(&seq, &c, (0, 15), Exec::Sequential).unwrap();
        let b = verify_dichotomy(&seq, &c, (0, 15), Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
