use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hiddensum::classify::Universe;
use hiddensum::enumerate::{count_variety_with, enumerate_variety_with};
use hiddensum::exec::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn variety(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_variety");
    for (n, d) in [(4, 2), (5, 2)] {
        for (name, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(name, format!("n{n}_d{d}")),
                &exec,
                |b, &exec| {
                    b.iter(|| enumerate_variety_with(exec, black_box(n), black_box(d)).unwrap())
                },
            );
        }
    }
    group.finish();

    let mut group = c.benchmark_group("count_variety");
    for (n, d) in [(4, 3), (6, 1)] {
        for (name, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(name, format!("n{n}_d{d}")),
                &exec,
                |b, &exec| b.iter(|| count_variety_with(exec, black_box(n), black_box(d)).unwrap()),
            );
        }
    }
    group.finish();
}

fn universe(c: &mut Criterion) {
    let mut group = c.benchmark_group("universe");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "N5"), &exec, |b, &exec| {
            b.iter(|| Universe::build(black_box(5), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, variety, universe);
criterion_main!(benches);
