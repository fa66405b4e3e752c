use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use synlab_bench::{bench_grammar, bench_program};
use synlab_core::grammar::{decode_stream, JunkRule};
use synlab_core::pathint::{exhaustive_measure, ActionSpec, LatticeSpec};
use synlab_core::redundancy::RedundancyProfile;

fn junk_counts(c: &mut Criterion) {
    let rule = JunkRule::no_consecutive_ones();
    let mut group = c.benchmark_group("count_strings");
    for length in [64usize, 512, 4096] {
        group.bench_with_input(BenchmarkId::from_parameter(length), &length, |b, &l| {
            b.iter(|| rule.count_strings(black_box(l)))
        });
    }
    group.finish();
    c.bench_function("growth_rate", |b| b.iter(|| black_box(&rule).growth_rate().unwrap()));
    c.bench_function("relative_weight_K200", |b| {
        b.iter(|| {
            let profile = RedundancyProfile::from_rule(JunkRule::unconstrained(2)).unwrap();
            profile.relative_weight(black_box(4.0), 6.0, 200.0).unwrap()
        })
    });
}

fn decoding(c: &mut Criterion) {
    let grammar = bench_grammar();
    let mut group = c.benchmark_group("decode_stream");
    for segments in [100usize, 10_000] {
        let program = bench_program(&grammar, segments);
        group.bench_with_input(BenchmarkId::from_parameter(segments), &program, |b, p| {
            b.iter(|| decode_stream(&grammar, black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn path_sums(c: &mut Criterion) {
    let action = ActionSpec::free(1.0);
    let mut group = c.benchmark_group("exhaustive_measure");
    group.sample_size(20);
    for steps in [4usize, 6] {
        let lattice = LatticeSpec {
            steps,
            epsilon: 1.0,
            grid: (0..7).map(|i| -1.5 + 0.5 * i as f64).collect(),
            x_initial: 0.0,
            x_final: 0.5,
        };
        group.bench_with_input(BenchmarkId::from_parameter(steps), &lattice, |b, l| {
            b.iter(|| exhaustive_measure(black_box(l), &action, 1.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, junk_counts, decoding, path_sums);
criterion_main!(benches);
