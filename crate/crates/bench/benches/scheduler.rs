use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use demseq_bench::{geometric, quarters};
use demseq_core::numeration::{verify_equivalence, BaseSpec};
use demseq_core::{generate, LetterId, Rational};

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    for &n in &[10_000usize, 100_000] {
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("float/quarters", n), &n, |b, &n| {
            let spec = quarters::<f64>();
            b.iter(|| generate(&spec, &[], black_box(n)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("exact/quarters", n), &n, |b, &n| {
            let spec = quarters::<Rational>();
            b.iter(|| generate(&spec, &[], black_box(n)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("float/geometric2", n), &n, |b, &n| {
            let spec = geometric::<f64>(2);
            b.iter(|| generate(&spec, &[LetterId::JOKER], black_box(n)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("exact/geometric10", n), &n, |b, &n| {
            let spec = geometric::<Rational>(10);
            b.iter(|| generate(&spec, &[LetterId::JOKER], black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn bench_equivalence(c: &mut Criterion) {
    let mut group = c.benchmark_group("numeration");
    group.sample_size(10);
    for b in [2u64, 10] {
        group.bench_function(format!("equivalence/b{b}/1e5"), |bench| {
            let base = BaseSpec::new(b).unwrap();
            bench.iter(|| verify_equivalence::<Rational>(base, black_box(100_000)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_generate, bench_equivalence);
criterion_main!(benches);
