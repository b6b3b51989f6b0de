use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slope_bench::prox_input;
use slope_core::{prox_sorted_l1, ProxWorkspace};

fn prox(c: &mut Criterion) {
    let mut group = c.benchmark_group("prox_sorted_l1");
    for p in [100, 1_000, 10_000, 100_000] {
        let (u, w) = prox_input(p, 7);
        group.bench_with_input(BenchmarkId::new("alloc", p), &p, |b, _| {
            b.iter(|| prox_sorted_l1(&u, 1.0, &w).unwrap())
        });
        let mut ws = ProxWorkspace::new(p);
        let mut out = vec![0.0; p];
        group.bench_with_input(BenchmarkId::new("workspace", p), &p, |b, _| {
            b.iter(|| ws.prox_into(&u, 1.0, w.as_slice(), &mut out))
        });
    }
    group.finish();
}

criterion_group!(benches, prox);
criterion_main!(benches);
