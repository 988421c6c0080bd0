use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dgreen::dichotomy::{certify, verify_dichotomy, DEFAULT_GAP_TOL};
use dgreen::instances::{self, RandomSystemSpec};
use dgreen::par::map_slice;
use dgreen::{Axis, Exec, ForcingSequence, GreenContext, OperatorSequence, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn system(dim: usize) -> (OperatorSequence, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let spec = RandomSystemSpec {
        dim,
        stable_plus: dim / 2,
        stable_minus: dim / 2,
        half_window: 4,
        window_spread: 0.15,
    };
    (instances::random_system(&mut rng, spec).unwrap(), rng)
}

fn dichotomy_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_dichotomy");
    for dim in [2, 6] {
        let (seq, _) = system(dim);
        let (cert, _) =
            certify(&seq, Axis::Plus, DEFAULT_GAP_TOL, (0, 60), Exec::Parallel).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, dim), &exec, |b, &exec| {
                b.iter(|| verify_dichotomy(&seq, black_box(&cert), (0, 60), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn green_window(c: &mut Criterion) {
    let mut group = c.benchmark_group("green_samples");
    for dim in [2, 6] {
        let (seq, mut rng) = system(dim);
        let ctx = GreenContext::new(seq, Tolerances::builtin()).unwrap();
        let h =
            instances::project_solvable(&ctx, &instances::random_forcing(&mut rng, dim, -8, 8, 12));
        for (name, exec) in MODES {
            let ctx = ctx.clone().with_exec(exec);
            group.bench_function(BenchmarkId::new(name, dim), |b| {
                b.iter(|| ctx.green_samples(black_box(&h), -40, 40).unwrap())
            });
        }
    }
    group.finish();
}

fn batch_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch_solve");
    let (seq, mut rng) = system(4);
    let ctx = GreenContext::new(seq, Tolerances::builtin())
        .unwrap()
        .with_exec(Exec::Sequential);
    let batch: Vec<ForcingSequence> = (0..64)
        .map(|_| {
            instances::project_solvable(&ctx, &instances::random_forcing(&mut rng, 4, -6, 6, 4))
        })
        .collect();
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                map_slice(exec, &batch, |h| {
                    ctx.quasi_solve(h, (-20, 20)).unwrap().defect
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, dichotomy_grid, green_window, batch_solves);
criterion_main!(benches);
