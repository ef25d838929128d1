use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phigamma::config::RingSpec;
use phigamma::descent::{functor_d_rank1, roundtrip_v_of_d, Character, FrobFixedSystem};

fn frobenius_fixed_points(c: &mut Criterion) {
    let mut group = c.benchmark_group("fixed_points");
    group.sample_size(10);
    for (name, p, factors, n) in [
        ("p2_fp_fp", 2u64, vec![(1, 0), (1, 0)], 8i64),
        ("p2_f4_ft", 2, vec![(2, 0), (1, 1)], 8),
        ("p3_fp_fp_fp", 3, vec![(1, 0), (1, 0), (1, 0)], 12),
    ] {
        let ring = RingSpec::standard(p, &factors, n).build().unwrap();
        let sys = FrobFixedSystem::all_frobenii(&ring, 4).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &sys, |b, sys| {
            b.iter(|| sys.solve().unwrap())
        });
    }
    group.finish();
}

fn roundtrip(c: &mut Criterion) {
    let mut group = c.benchmark_group("roundtrip");
    group.sample_size(10);
    for p in [3u64, 5] {
        let ring = RingSpec::standard(p, &[(1, 0), (1, 0)], 2 * p as i64 + 2)
            .build()
            .unwrap();
        let eta = Character::from_exponents(&ring, &[1, 1]);
        group.bench_with_input(BenchmarkId::from_parameter(p), &eta, |b, eta| {
            b.iter(|| {
                let d = functor_d_rank1(&ring, eta).unwrap();
                roundtrip_v_of_d(&d, eta).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, frobenius_fixed_points, roundtrip);
criterion_main!(benches);
