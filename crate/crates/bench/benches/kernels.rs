use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mdcc::constraints::{find_near_repeat, find_repeat, find_zero_volume, zero_window_map};
use mdcc::{minimal_shape_set, Shape};
use mdcc_bench::random_array;

fn scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    for n in [32usize, 64, 128] {
        let a = random_array(n, 2, 0.5, n as u64);
        let zero = Shape::cube(5, 2).unwrap();
        group.bench_with_input(BenchmarkId::new("zero_window_map", n), &a, |b, a| {
            b.iter(|| zero_window_map(black_box(a), &zero))
        });
        let set = minimal_shape_set(30, n, 2).unwrap();
        group.bench_with_input(BenchmarkId::new("find_zero_volume", n), &a, |b, a| {
            b.iter(|| find_zero_volume(black_box(a), &set))
        });
        let window = Shape::cube(6, 2).unwrap();
        group.bench_with_input(BenchmarkId::new("find_repeat", n), &a, |b, a| {
            b.iter(|| find_repeat(black_box(a), &window))
        });
        let near = Shape::cube(8, 2).unwrap();
        for p in [2usize, 3] {
            group.bench_with_input(BenchmarkId::new(format!("find_near_repeat_p{p}"), n), &a, |b, a| {
                b.iter(|| find_near_repeat(black_box(a), &near, p))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, scans);
criterion_main!(benches);
