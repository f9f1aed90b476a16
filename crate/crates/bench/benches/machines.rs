use std::hint::black_box;

use advicebench_core::analysis::subword_complexity;
use advicebench_core::sst::{
    compile_sst_to_2wftb, eliminate_lookbehind_lasso, mirror_sst, run_simple_sst,
};
use advicebench_core::transducers::samples::{back_visit, bounce};
use advicebench_core::transducers::{
    analyze_on_constant, mirror_blocks_2wft, normalize_directions_on_pi, one_way_simulation_on_pi,
    run_2wft, run_2wft_b, DEFAULT_BUDGET,
};
use advicebench_core::words::{block_mirror, pi_word, Alphabet, PAD};
use advicebench_core::{InfiniteWord, TwoWayTransducer};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mirror_input() -> InfiniteWord<char> {
    InfiniteWord::from_lasso_str("", "ab#baa#").unwrap()
}

fn runs(c: &mut Criterion) {
    let input = mirror_input();
    let t = mirror_blocks_2wft(&Alphabet::from_letters("ab").unwrap());
    let s = mirror_sst(&['a', 'b']);
    let compiled = compile_sst_to_2wftb(&s).unwrap();
    let mut g = c.benchmark_group("mirror");
    for n in [1000, 10_000] {
        g.bench_with_input(BenchmarkId::new("2wft", n), &n, |b, &n| {
            b.iter(|| run_2wft(&t, &input, DEFAULT_BUDGET).prefix(n).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("simple sst", n), &n, |b, &n| {
            b.iter(|| {
                run_simple_sst(&s, &input, DEFAULT_BUDGET)
                    .prefix(n)
                    .unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("compiled 2wftb", n), &n, |b, &n| {
            b.iter(|| {
                run_2wft_b(&compiled, &input, DEFAULT_BUDGET)
                    .prefix(n)
                    .unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("block_mirror", n), &n, |b, &n| {
            b.iter(|| block_mirror(&input).prefix(n).unwrap())
        });
    }
    g.finish();
}

fn constructions(c: &mut Criterion) {
    let s = mirror_sst(&['a', 'b']);
    let compiled = compile_sst_to_2wftb(&s).unwrap();
    let lasso = mirror_input().to_lasso().unwrap();
    c.bench_function("compile sst", |b| {
        b.iter(|| compile_sst_to_2wftb(black_box(&s)).unwrap())
    });
    c.bench_function("eliminate lookbehind", |b| {
        b.iter(|| eliminate_lookbehind_lasso(&compiled, black_box(&lasso), 10_000).unwrap())
    });
    c.bench_function("normalize bounce on pi", |b| {
        b.iter(|| normalize_directions_on_pi(&bounce(), 300).unwrap())
    });
    c.bench_function("one-way simulation of back_visit", |b| {
        b.iter(|| one_way_simulation_on_pi(&back_visit(), 3, 300).unwrap())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let machines: Vec<TwoWayTransducer> = (0..20)
        .map(|_| TwoWayTransducer::random(&mut rng, 4, &[PAD], &['a', 'b'], 2))
        .collect();
    c.bench_function("analyze 20 machines on blank", |b| {
        b.iter(|| {
            machines
                .iter()
                .map(|t| analyze_on_constant(t, PAD, 100_000).is_ok())
                .filter(|&ok| ok)
                .count()
        })
    });
}

fn complexity(c: &mut Criterion) {
    let pi = pi_word(1);
    c.bench_function("complexity of pi, 10k window", |b| {
        b.iter(|| subword_complexity(&pi, 8, black_box(10_000)))
    });
}

criterion_group!(benches, runs, constructions, complexity);
criterion_main!(benches);
