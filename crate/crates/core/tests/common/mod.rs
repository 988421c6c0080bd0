#![allow(dead_code)]

use dgreen::instances::{self, RandomSystemSpec};
use dgreen::{ForcingSequence, GreenContext, OperatorSequence, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Instance {
    pub ctx: GreenContext,
    pub h: ForcingSequence,
}

impl Instance {
    pub fn seq(&self) -> &OperatorSequence {
        self.ctx.seq()
    }
}

pub fn random_context(rng: &mut ChaCha8Rng, spec: RandomSystemSpec) -> GreenContext {
    let seq = instances::random_system(rng, spec).expect("random system is valid");
    GreenContext::new(seq, Tolerances::builtin()).expect("random system has dichotomies")
}

/// Random system of dimension at most `max_dim` with raw (possibly
/// unsolvable) forcing supported in `[−5, 5]`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_dim: usize) -> Instance {
    let spec = RandomSystemSpec::sample(rng, max_dim);
    let ctx = random_context(rng, spec);
    let entries = rng.random_range(1..=4);
    let h = instances::random_forcing(rng, spec.dim, -5, 5, entries);
    Instance { ctx, h }
}

/// Like [`random_instance`] with the forcing projected onto the solvable set.
pub fn solvable_instance(rng: &mut ChaCha8Rng, max_dim: usize) -> Instance {
    let mut inst = random_instance(rng, max_dim);
    inst.h = instances::project_solvable(&inst.ctx, &inst.h);
    inst
}

/// A system with at least one solvability condition (`d ≥ 1`): fewer stable
/// directions at `+∞` than at `−∞`.
pub fn constrained_context(rng: &mut ChaCha8Rng, max_dim: usize) -> GreenContext {
    loop {
        let dim = rng.random_range(1..=max_dim);
        let stable_minus = rng.random_range(1..=dim);
        let stable_plus = rng.random_range(0..stable_minus);
        let spec = RandomSystemSpec {
            dim,
            stable_plus,
            stable_minus,
            half_window: rng.random_range(0..=4),
            window_spread: 0.15,
        };
        let ctx = random_context(rng, spec);
        if ctx.classification().d >= 1 {
            return ctx;
        }
    }
}
