//! Canonical small systems and seeded random generators for tests, benches
//! and the `demo` command.
//!
//! * saddle: `A_n ≡ diag(1/2, 2)`, unique bounded solution for every forcing.
//! * resonant: scalar, `A_n = 1/2` for `n < 0` and `2` for `n ≥ 0`; one
//!   solvability condition, no bounded homogeneous solutions.
//! * trichotomy: `diag(1/2, 2)` on the left, `diag(1/2, 1/2)` on the right;
//!   always solvable with a one-parameter bounded family.

use nalgebra::linalg::QR;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::green::GreenContext;
use crate::linsys::{ForcingSequence, OperatorSequence};
use crate::mat::{identity, svd, Matrix, Vector};

fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_row_slice(v))
}

pub fn saddle() -> OperatorSequence {
    OperatorSequence::constant(diag(&[0.5, 2.0])).expect("saddle is invertible")
}

pub fn resonant() -> OperatorSequence {
    OperatorSequence::new(0, 0, Vec::new(), diag(&[0.5]), diag(&[2.0]))
        .expect("resonant is invertible")
}

pub fn trichotomy() -> OperatorSequence {
    OperatorSequence::new(0, 0, Vec::new(), diag(&[0.5, 2.0]), diag(&[0.5, 0.5]))
        .expect("trichotomy is invertible")
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    let qr = QR::new(gaussian_matrix(rng, dim, dim));
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[derive(Debug, Clone, Copy)]
pub struct RandomSystemSpec {
    pub dim: usize,
    /// Number of stable eigenvalues of `tail_plus`.
    pub stable_plus: usize,
    /// Number of stable eigenvalues of `tail_minus`.
    pub stable_minus: usize,
    /// Explicit window is `[−half_window, half_window)`.
    pub half_window: i64,
    /// Size of the perturbation of the window matrices away from the identity.
    pub window_spread: f64,
}

impl RandomSystemSpec {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> Self {
        let dim = rng.random_range(1..=max_dim);
        Self {
            dim,
            stable_plus: rng.random_range(0..=dim),
            stable_minus: rng.random_range(0..=dim),
            half_window: rng.random_range(0..=4),
            window_spread: 0.15,
        }
    }
}

fn hyperbolic_tail<R: Rng + ?Sized>(rng: &mut R, dim: usize, stable: usize) -> Matrix {
    let eig: Vec<f64> = (0..dim)
        .map(|i| {
            let modulus = if i < stable {
                rng.random_range(0.2..=0.8)
            } else {
                rng.random_range(1.25..=5.0)
            };
            if rng.random_bool(0.5) {
                modulus
            } else {
                -modulus
            }
        })
        .collect();
    let o = random_orthogonal(rng, dim);
    &o * diag(&eig) * o.transpose()
}

/// Random dichotomous system: orthogonally rotated diagonal tails with
/// eigenvalue moduli in `[0.2, 0.8] ∪ [1.25, 5]` and window matrices near `I`.
pub fn random_system<R: Rng + ?Sized>(
    rng: &mut R,
    spec: RandomSystemSpec,
) -> Result<OperatorSequence> {
    let d = spec.dim;
    let tail_plus = hyperbolic_tail(rng, d, spec.stable_plus);
    let tail_minus = hyperbolic_tail(rng, d, spec.stable_minus);
    let w = spec.half_window;
    let scale = spec.window_spread / (d as f64).sqrt();
    let window = (0..2 * w)
        .map(|_| identity(d) + gaussian_matrix(rng, d, d) * scale)
        .collect();
    OperatorSequence::new(-w, w, window, tail_minus, tail_plus)
}

/// Gaussian forcing with `entries` nonzero samples placed in `[lo, hi]`.
pub fn random_forcing<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    lo: i64,
    hi: i64,
    entries: usize,
) -> ForcingSequence {
    let mut h = ForcingSequence::zero(dim);
    for _ in 0..entries {
        let n = rng.random_range(lo..=hi);
        h.insert(n, gaussian_vector(rng, dim))
            .expect("dimension matches");
    }
    h
}

/// `[H(k+1)]_{k ∈ support}` side by side, and the support indices.
fn condition_matrix(ctx: &GreenContext, h: &ForcingSequence) -> (Matrix, Vec<i64>) {
    let d = ctx.dim();
    let ks: Vec<i64> = h.iter().map(|(k, _)| k).collect();
    let mut j = Matrix::zeros(d, d * ks.len());
    for (i, &k) in ks.iter().enumerate() {
        j.view_mut((0, i * d), (d, d)).copy_from(&ctx.weight_h(k));
    }
    (j, ks)
}

fn apply_correction(h: &ForcingSequence, ks: &[i64], delta: &Vector, sign: f64) -> ForcingSequence {
    let d = h.dim();
    let mut out = h.clone();
    for (i, &k) in ks.iter().enumerate() {
        let v = h.at(k) + delta.rows(i * d, d) * sign;
        out.insert(k, v).expect("dimension matches");
    }
    out
}

/// Removes the solvability residual by subtracting its minimal-norm preimage
/// on the existing support.
pub fn project_solvable(ctx: &GreenContext, h: &ForcingSequence) -> ForcingSequence {
    if h.is_empty() {
        return h.clone();
    }
    let (j, ks) = condition_matrix(ctx, h);
    let rho = Vector::from_vec(
        ctx.solvability_residual(h)
            .expect("dimension matches")
            .residual_vector,
    );
    let dec = svd(&j);
    let delta = dec.solve(&rho, 1e-12 * dec.max());
    apply_correction(h, &ks, &delta, -1.0)
}

/// Adds a forcing correction on the existing support whose solvability
/// residual has norm `amount` along a random admissible direction. Returns
/// `None` when no condition constrains `h` (nothing to perturb).
pub fn perturb_unsolvable<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &GreenContext,
    h: &ForcingSequence,
    amount: f64,
) -> Option<ForcingSequence> {
    if h.is_empty() {
        return None;
    }
    let (j, ks) = condition_matrix(ctx, h);
    let dec = svd(&j);
    let smax = dec.max();
    if smax <= 1e-12 {
        return None;
    }
    // random direction inside range(J)
    let range = dec.range(1e-8 * smax);
    let dir = &range * gaussian_vector(rng, range.ncols());
    if dir.norm() == 0.0 {
        return None;
    }
    let target = dir.normalize() * amount;
    let delta = dec.solve(&target, 1e-8 * smax);
    Some(apply_correction(h, &ks, &delta, 1.0))
}

/// Commuting projector pair `P = S·diag(p)·S⁻¹`, `Q = S·diag(q)·S⁻¹`; with
/// `symmetric` the common eigenbasis `S` is orthogonal.
pub fn random_commuting_projectors<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    symmetric: bool,
) -> (Matrix, Matrix) {
    let s = if symmetric {
        random_orthogonal(rng, dim)
    } else {
        identity(dim) + gaussian_matrix(rng, dim, dim) * (0.4 / (dim as f64).sqrt())
    };
    let s_inv = if symmetric {
        s.transpose()
    } else {
        s.clone()
            .try_inverse()
            .expect("near-identity matrix is invertible")
    };
    let mut pick = || {
        let bits: Vec<f64> = (0..dim)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        &s * diag(&bits) * &s_inv
    };
    let p = pick();
    let q = pick();
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::Tolerances;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let o = random_orthogonal(&mut rng, 5);
        assert!((o.transpose() * &o - identity(5)).amax() < 1e-13);
    }

    #[test]
    fn projection_makes_forcing_solvable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = RandomSystemSpec {
            dim: 3,
            stable_plus: 1,
            stable_minus: 2,
            half_window: 2,
            window_spread: 0.15,
        };
        let seq = random_system(&mut rng, spec).unwrap();
        let ctx = GreenContext::new(seq, Tolerances::builtin()).unwrap();
        assert!(ctx.classification().d >= 1);
        let h = random_forcing(&mut rng, 3, -3, 3, 4);
        assert!(!ctx.solvability_residual(&h).unwrap().solvable);
        let hs = project_solvable(&ctx, &h);
        assert!(ctx.solvability_residual(&hs).unwrap().solvable);
        let hu = perturb_unsolvable(&mut rng, &ctx, &hs, 1e-3).unwrap();
        let r = ctx.solvability_residual(&hu).unwrap();
        assert!((r.residual_norm - 1e-3).abs() < 1e-9);
    }
}
