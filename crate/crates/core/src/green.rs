//! Bounded solutions on the whole axis through the generalized Green's operator.
//!
//! On each semi-axis every bounded solution has the form
//!
//! ```text
//! n ≥ 0:  U(n)Pξ + Σ_{0≤k<n} U(n)PU(k+1)⁻¹h_k − Σ_{k≥n} U(n)(I−P)U(k+1)⁻¹h_k
//! n ≤ 0:  U(n)(I−Q)ξ + Σ_{k<n} U(n)QU(k+1)⁻¹h_k − Σ_{n≤k≤−1} U(n)(I−Q)U(k+1)⁻¹h_k
//! ```
//!
//! and the two pieces agree at `n = 0` exactly when `Dξ = g`. Solvability is
//! `P_{N(D*)}g = 0`, the bounded family is `ξ = D⁺g + P·P_{N(D)}c`.
//!
//! Every term `U(n)PU(k+1)⁻¹h` is evaluated as a projected propagation
//! (`Φ(n, k+1)P(k+1)h` stepwise, re-projecting at each time), never by forming
//! `U(n)` and `U(k+1)⁻¹` separately; the latter loses all accuracy once the
//! unstable growth over the horizon exceeds `1/ε`.

use serde::{Deserialize, Serialize};

use crate::dichotomy::{projector_field, Axis, ProjectorField, DEFAULT_GAP_TOL};
use crate::error::{Error, Result};
use crate::genpinv::{
    build_d, classify, homogeneous_basis, pseudo_inverse, Classification, GeneralizedInverse,
    DEFAULT_RANK_TOL_REL,
};
use crate::linsys::{ForcingSequence, OperatorSequence, StateSequence};
use crate::mat::{identity, Matrix, Vector};
use crate::par::{self, Exec};

pub const DEFAULT_SOLVABILITY_TOL: f64 = 1e-8;
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rank_tol_rel")]
    pub rank_tol_rel: f64,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "default_solvability_tol")]
    pub solvability_tol: f64,
    #[serde(default = "default_verify_tol")]
    pub verify_tol: f64,
}

fn env_or(name: &str, default: f64) -> f64 {
    std::env::var(name)
        .ok()
        .and_then(|raw| raw.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
        .unwrap_or(default)
}

fn default_rank_tol_rel() -> f64 {
    env_or("DGREEN_RANK_TOL_REL", DEFAULT_RANK_TOL_REL)
}

fn default_gap_tol() -> f64 {
    env_or("DGREEN_GAP_TOL", DEFAULT_GAP_TOL)
}

fn default_solvability_tol() -> f64 {
    env_or("DGREEN_SOLVABILITY_TOL", DEFAULT_SOLVABILITY_TOL)
}

fn default_verify_tol() -> f64 {
    env_or("DGREEN_VERIFY_TOL", DEFAULT_VERIFY_TOL)
}

impl Default for Tolerances {
    /// Built-in defaults, overridable through `DGREEN_*` environment variables.
    fn default() -> Self {
        Self {
            rank_tol_rel: default_rank_tol_rel(),
            gap_tol: default_gap_tol(),
            solvability_tol: default_solvability_tol(),
            verify_tol: default_verify_tol(),
        }
    }
}

impl Tolerances {
    /// Built-in defaults, ignoring the environment.
    pub fn builtin() -> Self {
        Self {
            rank_tol_rel: DEFAULT_RANK_TOL_REL,
            gap_tol: DEFAULT_GAP_TOL,
            solvability_tol: DEFAULT_SOLVABILITY_TOL,
            verify_tol: DEFAULT_VERIFY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    /// `Σ_k H(k+1)h_k`.
    pub residual_vector: Vec<f64>,
    pub residual_norm: f64,
    pub d_conditions: usize,
    pub solvable: bool,
}

#[derive(Debug, Clone)]
pub struct BoundedSolutionFamily {
    /// `G[h](n)` over the output window.
    pub particular: StateSequence,
    /// `n ↦ U(n)b_j` for an orthonormal basis `b_j` of `range(P·P_{N(D)})`.
    pub basis: Vec<StateSequence>,
    pub r: usize,
    pub xi_particular: Vector,
    /// `‖x(0+) − x(0−)‖`; zero for exact solutions, `‖P_{N(D*)}g‖` for quasisolutions.
    pub defect: f64,
    pub report: SolvabilityReport,
}

/// Everything needed to evaluate the Green's operator of one system.
#[derive(Debug, Clone)]
pub struct GreenContext {
    seq: OperatorSequence,
    plus: ProjectorField,
    minus: ProjectorField,
    p: Matrix,
    q: Matrix,
    gi: GeneralizedInverse,
    classification: Classification,
    homogeneous: Matrix,
    tolerances: Tolerances,
    exec: Exec,
}

impl GreenContext {
    pub fn new(seq: OperatorSequence, tolerances: Tolerances) -> Result<Self> {
        let (plus, _) = projector_field(&seq, Axis::Plus, tolerances.gap_tol)?;
        let (minus, _) = projector_field(&seq, Axis::Minus, tolerances.gap_tol)?;
        let p = plus.anchor(&seq);
        let q = minus.anchor(&seq);
        let d = build_d(&p, &q)?;
        let gi = pseudo_inverse(&d, tolerances.rank_tol_rel)?;
        let classification = classify(&gi, &p, &q)?;
        let homogeneous = homogeneous_basis(&gi, &p);
        Ok(Self {
            seq,
            plus,
            minus,
            p,
            q,
            gi,
            classification,
            homogeneous,
            tolerances,
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn seq(&self) -> &OperatorSequence {
        &self.seq
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn plus_field(&self) -> &ProjectorField {
        &self.plus
    }

    pub fn minus_field(&self) -> &ProjectorField {
        &self.minus
    }

    pub fn generalized_inverse(&self) -> &GeneralizedInverse {
        &self.gi
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn dim(&self) -> usize {
        self.seq.dim()
    }

    fn check_forcing(&self, h: &ForcingSequence) -> Result<()> {
        if h.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "forcing dimension {} vs system dimension {}",
                h.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `Q·U(k+1)⁻¹·v` for `k ≤ −1`, or `(I − P)·U(k+1)⁻¹·v` for `k ≥ 0`: the
    /// summand of `g` contributed by `h_k = v`.
    fn g_term(&self, k: i64, v: &Vector) -> Vector {
        if k >= 0 {
            self.plus.pull_kernel_vec(&self.seq, k + 1, 0, v)
        } else {
            self.minus.push_range_vec(&self.seq, k + 1, 0, v)
        }
    }

    /// `H(n+1) = P_{N(D*)}·Q·U(n+1)⁻¹`.
    ///
    /// Evaluated through `P_{N(D*)}(I − P)U(n+1)⁻¹` for `n ≥ 0` and through the
    /// `Q` form for `n < 0`; the two are equal since `P_{N(D*)}D = 0`.
    pub fn weight_h(&self, n: i64) -> Matrix {
        let eye = identity(self.dim());
        let inner = if n >= 0 {
            self.plus.pull_kernel(&self.seq, n + 1, 0, &eye)
        } else {
            self.minus.push_range(&self.seq, n + 1, 0, &eye)
        };
        &self.gi.proj_coker * inner
    }

    /// Both displayed forms of `H(n+1)`, computed directly from `U(n+1)⁻¹`.
    /// Accurate only while `U(n+1)⁻¹` is moderate.
    pub fn weight_h_forms(&self, n: i64) -> (Matrix, Matrix) {
        let u_inv = self.seq.u_inv(n + 1);
        let via_q = &self.gi.proj_coker * &self.q * &u_inv;
        let via_p = &self.gi.proj_coker * (identity(self.dim()) - &self.p) * &u_inv;
        (via_q, via_p)
    }

    /// `g = Σ_{k≥0} (I−P)U(k+1)⁻¹h_k + Σ_{k≤−1} Q·U(k+1)⁻¹h_k`.
    pub fn rhs_g(&self, h: &ForcingSequence) -> Result<Vector> {
        self.check_forcing(h)?;
        let mut g = Vector::zeros(self.dim());
        for (k, v) in h.iter() {
            g += self.g_term(k, v);
        }
        Ok(g)
    }

    pub fn solvability_residual(&self, h: &ForcingSequence) -> Result<SolvabilityReport> {
        self.check_forcing(h)?;
        let mut residual = Vector::zeros(self.dim());
        for (k, v) in h.iter() {
            residual += self.weight_h(k) * v;
        }
        let residual_norm = residual.norm();
        Ok(SolvabilityReport {
            residual_vector: residual.iter().copied().collect(),
            residual_norm,
            d_conditions: self.classification.d,
            solvable: residual_norm <= self.tolerances.solvability_tol * (1.0 + h.sup_norm()),
        })
    }

    /// `ξ₀ = D⁺g`, provided `P_{N(D*)}g` vanishes.
    pub fn solve_xi(&self, g: &Vector) -> Result<Vector> {
        let residual = &self.gi.proj_coker * g;
        let residual_norm = residual.norm();
        if residual_norm > self.tolerances.solvability_tol * (1.0 + g.norm()) {
            return Err(Error::NotSolvable(Box::new(SolvabilityReport {
                residual_vector: residual.iter().copied().collect(),
                residual_norm,
                d_conditions: self.classification.d,
                solvable: false,
            })));
        }
        Ok(&self.gi.d_pinv * g)
    }

    fn plus_branch(&self, xi: &Vector, h: &ForcingSequence, n: i64) -> Vector {
        let (seq, f) = (&self.seq, &self.plus);
        let mut x = f.push_range_vec(seq, 0, n, xi);
        for (k, v) in h.iter() {
            if k < 0 {
                continue;
            }
            if k < n {
                x += f.push_range_vec(seq, k + 1, n, v);
            } else {
                x -= f.pull_kernel_vec(seq, k + 1, n, v);
            }
        }
        x
    }

    fn minus_branch(&self, xi: &Vector, h: &ForcingSequence, n: i64) -> Vector {
        let (seq, f) = (&self.seq, &self.minus);
        let mut x = f.pull_kernel_vec(seq, 0, n, xi);
        for (k, v) in h.iter() {
            if k > -1 {
                continue;
            }
            if k < n {
                x += f.push_range_vec(seq, k + 1, n, v);
            } else {
                x -= f.pull_kernel_vec(seq, k + 1, n, v);
            }
        }
        x
    }

    /// The semi-axis-bounded solution with parameter `ξ` at time `n`; the
    /// `n ≥ 0` piece is used at `n = 0`.
    pub fn semiaxis_solution(&self, xi: &Vector, h: &ForcingSequence, n: i64) -> Result<Vector> {
        self.check_forcing(h)?;
        if xi.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!("ξ has length {}", xi.len())));
        }
        Ok(if n >= 0 {
            self.plus_branch(xi, h, n)
        } else {
            self.minus_branch(xi, h, n)
        })
    }

    /// `ξ₀ = D⁺g` without checking solvability.
    pub fn xi_minimal(&self, h: &ForcingSequence) -> Result<Vector> {
        Ok(&self.gi.d_pinv * self.rhs_g(h)?)
    }

    /// `G[h](n) = U(n)Z(n)`.
    pub fn green_apply(&self, h: &ForcingSequence, n: i64) -> Result<Vector> {
        let xi = self.xi_minimal(h)?;
        self.semiaxis_solution(&xi, h, n)
    }

    /// `G[h](n)` over `[lo, hi]`.
    pub fn green_samples(&self, h: &ForcingSequence, lo: i64, hi: i64) -> Result<StateSequence> {
        let xi = self.xi_minimal(h)?;
        self.samples_with_xi(&xi, h, lo, hi)
    }

    fn samples_with_xi(
        &self,
        xi: &Vector,
        h: &ForcingSequence,
        lo: i64,
        hi: i64,
    ) -> Result<StateSequence> {
        let samples = par::map_range(self.exec, lo, hi, |n| {
            if n >= 0 {
                self.plus_branch(xi, h, n)
            } else {
                self.minus_branch(xi, h, n)
            }
        });
        StateSequence::new(self.dim(), lo, samples)
    }

    /// `(n ≥ 0 piece)(0) − (n ≤ 0 piece)(0)` of `G[h]`; analytically `−P_{N(D*)}g`.
    pub fn jump(&self, h: &ForcingSequence) -> Result<Vector> {
        let xi = self.xi_minimal(h)?;
        Ok(self.plus_branch(&xi, h, 0) - self.minus_branch(&xi, h, 0))
    }

    fn homogeneous_sequence(&self, b: &Vector, lo: i64, hi: i64) -> Result<StateSequence> {
        let samples = par::map_range(self.exec, lo, hi, |n| {
            if n >= 0 {
                self.plus.push_range_vec(&self.seq, 0, n, b)
            } else {
                self.minus.pull_kernel_vec(&self.seq, 0, n, b)
            }
        });
        StateSequence::new(self.dim(), lo, samples)
    }

    /// Basis of the bounded homogeneous solutions, sampled on `[lo, hi]`.
    pub fn homogeneous_family(&self, lo: i64, hi: i64) -> Result<Vec<StateSequence>> {
        (0..self.homogeneous.ncols())
            .map(|j| self.homogeneous_sequence(&self.homogeneous.column(j).into_owned(), lo, hi))
            .collect()
    }

    fn family(
        &self,
        h: &ForcingSequence,
        window: (i64, i64),
        report: SolvabilityReport,
    ) -> Result<BoundedSolutionFamily> {
        let (lo, hi) = window;
        if lo > hi {
            return Err(Error::RangeMismatch(format!(
                "empty output window [{lo}, {hi}]"
            )));
        }
        let xi = self.xi_minimal(h)?;
        let jump = self.plus_branch(&xi, h, 0) - self.minus_branch(&xi, h, 0);
        let particular = self.samples_with_xi(&xi, h, lo, hi)?;
        let basis = self.homogeneous_family(lo, hi)?;
        Ok(BoundedSolutionFamily {
            particular,
            r: basis.len(),
            basis,
            xi_particular: xi,
            defect: jump.norm(),
            report,
        })
    }

    /// The bounded solutions `x(c) = U(n)P·P_{N(D)}c + G[h](n)` on `window`.
    pub fn solve_bounded(
        &self,
        h: &ForcingSequence,
        window: (i64, i64),
    ) -> Result<BoundedSolutionFamily> {
        let report = self.solvability_residual(h)?;
        if !report.solvable {
            return Err(Error::NotSolvable(Box::new(report)));
        }
        self.family(h, window, report)
    }

    /// Like [`solve_bounded`](Self::solve_bounded) but always returns the
    /// `ξ₀ = D⁺g` member, which minimizes the mismatch at `n = 0`. The
    /// mismatch shows up as a residual in the step from `n = −1` to `n = 0`.
    pub fn quasi_solve(
        &self,
        h: &ForcingSequence,
        window: (i64, i64),
    ) -> Result<BoundedSolutionFamily> {
        let report = self.solvability_residual(h)?;
        self.family(h, window, report)
    }
}

/// Direct evaluation of `U(n)Z(n)` from explicitly formed `U(n)` and
/// `U(k+1)⁻¹`. Independent of the projected propagation used by
/// [`GreenContext`]; only usable on short horizons.
pub fn green_apply_direct(ctx: &GreenContext, h: &ForcingSequence, n: i64) -> Vector {
    let seq = ctx.seq();
    let (p, q) = (ctx.p(), ctx.q());
    let eye = identity(seq.dim());
    let ip = &eye - p;
    let iq = &eye - q;
    let mut g = Vector::zeros(seq.dim());
    for (k, v) in h.iter() {
        let w = seq.u_inv(k + 1) * v;
        g += if k >= 0 { &ip * w } else { q * w };
    }
    let xi = &ctx.generalized_inverse().d_pinv * g;
    let mut z = Vector::zeros(seq.dim());
    if n >= 0 {
        z += p * &xi;
        for (k, v) in h.iter().filter(|(k, _)| *k >= 0) {
            let w = seq.u_inv(k + 1) * v;
            if k < n {
                z += p * w;
            } else {
                z -= &ip * w;
            }
        }
    } else {
        z += &iq * &xi;
        for (k, v) in h.iter().filter(|(k, _)| *k <= -1) {
            let w = seq.u_inv(k + 1) * v;
            if k < n {
                z += q * w;
            } else {
                z -= &iq * w;
            }
        }
    }
    seq.u_of(n) * z
}

/// `max_n ‖x_{n+1} − A_n x_n − h_n‖` over the range of `x`, optionally
/// skipping one step (the matching step of a quasisolution).
pub fn dynamics_residual(
    seq: &OperatorSequence,
    x: &StateSequence,
    h: &ForcingSequence,
    skip: Option<i64>,
) -> Result<f64> {
    let lx = seq.apply_l(x)?;
    Ok(lx
        .iter()
        .filter(|(n, _)| Some(*n) != skip)
        .map(|(n, v)| (v - h.at(n)).norm())
        .fold(0.0, f64::max))
}
