//! Sequential against parallel batch evaluation.
//!
//! `cargo bench -p tp-eqln --bench batch_eval`. With
//! `--no-default-features` both modes run sequentially, which gives the
//! fallback's numbers.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use tp_eqln::par::ExecMode;
use tp_eqln::{EqlNetwork, LayerSpec, NetworkSpec};

fn network() -> EqlNetwork {
    // Shape of the three-layer pick-and-place networks.
    let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1); 3], 3).unwrap();
    EqlNetwork::init(spec, 1).unwrap()
}

fn inputs(rows: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    Array2::from_shape_fn((rows, 2), |_| rng.random_range(0.0..1.0))
}

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn forward(c: &mut Criterion) {
    let net = network();
    let mut group = c.benchmark_group("forward_batch");
    for rows in [1200, 8192] {
        let x = inputs(rows);
        group.throughput(Throughput::Elements(rows as u64));
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, rows), &x, |b, x| {
                b.iter(|| net.forward_batch_with(black_box(x.view()), mode).unwrap())
            });
        }
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let net = network();
    let mut group = c.benchmark_group("loss_and_gradient");
    for rows in [1200, 8192] {
        let x = inputs(rows);
        group.throughput(Throughput::Elements(rows as u64));
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, rows), &x, |b, x| {
                b.iter(|| {
                    net.loss_and_gradient(black_box(x.view()), mode, |_, out, d| {
                        d.iter_mut().zip(out).for_each(|(g, y)| *g = 2.0 * y);
                        out.iter().map(|y| y * y).sum()
                    })
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, forward, gradient);
criterion_main!(benches);
