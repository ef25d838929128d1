use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phigamma::coeff::tensor_idempotents;
use phigamma::config::RingSpec;
use phigamma::endo::RingEndo;
use phigamma::random::{random_series, random_unit_series};
use phigamma::{FiniteFieldSpec, PAdicUnitApprox, TensorAlgebra};

fn series_mul(c: &mut Criterion) {
    let mut group = c.benchmark_group("series_mul");
    for n in [8i64, 16, 32] {
        let ring = RingSpec::standard(3, &[(1, 0), (2, 1)], n).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_series(&ring, &mut rng, 24, -1, n, 1);
        let b = random_series(&ring, &mut rng, 24, -1, n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| ring.mul(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn series_invert(c: &mut Criterion) {
    let mut group = c.benchmark_group("series_invert");
    for n in [8i64, 16] {
        let ring = RingSpec::standard(2, &[(2, 0), (1, 0)], n).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unit_series(&ring, &mut rng, 6, 3, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| ring.invert(black_box(&u)).unwrap())
        });
    }
    group.finish();
}

fn ring_maps(c: &mut Criterion) {
    let ring = RingSpec::standard(3, &[(1, 0), (1, 1)], 16)
        .build()
        .unwrap();
    let m = RingSpec::min_digits(&ring);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_series(&ring, &mut rng, 16, 0, 5, 1);
    let chi = PAdicUnitApprox::new(3, 4, m).unwrap();
    let phi = RingEndo::make_phi(&ring, 0);
    let gamma = RingEndo::make_gamma(&ring, 0, &chi).unwrap();
    let delta = RingEndo::make_delta(&ring, 1, &[chi]).unwrap();
    let mut group = c.benchmark_group("apply");
    group.bench_function("phi", |b| b.iter(|| phi.apply(black_box(&x)).unwrap()));
    group.bench_function("gamma", |b| b.iter(|| gamma.apply(black_box(&x)).unwrap()));
    group.bench_function("delta", |b| b.iter(|| delta.apply(black_box(&x)).unwrap()));
    group.finish();
}

fn idempotents(c: &mut Criterion) {
    let mut group = c.benchmark_group("tensor_idempotents");
    for (p, ns) in [(2u64, vec![4, 4]), (3, vec![2, 4]), (5, vec![2, 2, 2])] {
        let specs: Vec<_> = ns
            .iter()
            .map(|&n| FiniteFieldSpec::standard(p, n).unwrap())
            .collect();
        let alg = TensorAlgebra::new(specs).unwrap();
        let id = format!(
            "p{p}_{}",
            ns.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("x")
        );
        group.bench_function(id, |b| {
            b.iter(|| tensor_idempotents(black_box(&alg)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, series_mul, series_invert, ring_maps, idempotents);
criterion_main!(benches);
