use std::hint::black_box;

use bnformat::lts::{branching_profile, derive_lts, Bounds};
use bnformat_bench::{case, CHECKED, DERIVED};
use criterion::{criterion_group, criterion_main, Criterion};

fn rule_format(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_rule_format");
    g.sample_size(10);
    for name in CHECKED {
        let ex = case(name);
        g.bench_function(name, |b| b.iter(|| black_box(ex.run())));
    }
    g.finish();
}

fn derivation(c: &mut Criterion) {
    let mut g = c.benchmark_group("derive_lts");
    g.sample_size(10);
    for (name, bounds) in DERIVED {
        let ex = case(name);
        g.bench_function(name, |b| b.iter(|| black_box(derive_lts(&ex.spec.tss, bounds).unwrap())));
    }
    g.finish();
}

fn profile(c: &mut Criterion) {
    let mut g = c.benchmark_group("branching_profile");
    g.sample_size(10);
    let ex = case("microchocs_recv");
    g.bench_function("microchocs_recv", |b| {
        b.iter(|| black_box(branching_profile(&ex.spec.tss, ex.kind, Bounds::new(3, 3, 50), Bounds::new(4, 3, 50))))
    });
    g.finish();
}

criterion_group!(benches, rule_format, derivation, profile);
criterion_main!(benches);
