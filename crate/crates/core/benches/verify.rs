// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mvlmul::netgen::gen_multiplier;
use mvlmul::sim::{verify_exhaustive_with, Execution, DEFAULT_EXHAUSTIVE_CAP};

fn exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_exhaustive");
    group.sample_size(10);
    for (radix, n) in [(2, 8), (4, 4)] {
        let net = gen_multiplier(radix, n).unwrap();
        group.throughput(Throughput::Elements(1 << 16));
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel { workers: None }),
        ] {
            group.bench_with_input(BenchmarkId::new(name, net.label()), &net, |b, net| {
                b.iter(|| {
                    verify_exhaustive_with(black_box(net), DEFAULT_EXHAUSTIVE_CAP, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, exhaustive);
criterion_main!(benches);
