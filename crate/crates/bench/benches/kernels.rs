use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use rlga_core::baselines::{cds, neh};
use rlga_core::ga::{ga_step, init_population, GenerationParams, SelectionMethod};
use rlga_core::pfsp::random_permutation;
use rlga_core::rl::{QNetwork, Sample};
use rlga_core::taillard::generate;
use rlga_core::{makespan, RlParams};

fn pfsp(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, m) in [(20, 5), (50, 10), (100, 10)] {
        let inst = generate("b", n, m, 873654221).unwrap();
        let perm = random_permutation(n, &mut rng).unwrap();
        c.bench_function(&format!("makespan_{n}x{m}"), |b| b.iter(|| makespan(&inst, black_box(&perm)).unwrap()));
    }
    let inst = generate("b", 20, 5, 873654221).unwrap();
    c.bench_function("neh_20x5", |b| b.iter(|| neh(black_box(&inst))));
    c.bench_function("cds_20x5", |b| b.iter(|| cds(black_box(&inst)).unwrap()));
}

fn ga(c: &mut Criterion) {
    let inst = generate("b", 20, 5, 873654221).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pop = init_population(&inst, 30, &mut rng).unwrap();
    for method in SelectionMethod::ALL {
        let params = GenerationParams::new(method, 0.5, 0.5).unwrap();
        c.bench_function(&format!("ga_step_{method:?}_20x5_m30"), |b| {
            b.iter(|| ga_step(&inst, black_box(&pop), params, &mut rng).unwrap())
        });
    }
}

fn network(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut net = QNetwork::new(&RlParams::default().layer_dims(), &mut rng).unwrap();
    let batch: Vec<Sample> = (0..32)
        .map(|i| Sample {
            input: vec![1.0 + i as f64 / 100.0, 0.5],
            action: i % 27,
            target: 0.1,
        })
        .collect();
    c.bench_function("qnet_forward", |b| b.iter(|| net.forward(black_box(&[1.02, 0.7])).unwrap()));
    c.bench_function("qnet_train_step_batch32", |b| b.iter(|| net.train_step(black_box(&batch), 1e-4).unwrap()));
}

criterion_group!(benches, pfsp, ga, network);
criterion_main!(benches);
