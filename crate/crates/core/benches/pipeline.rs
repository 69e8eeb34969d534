//! Parallel against sequential execution on the one-third benchmark: the
//! abstraction build (projection of cell encodings) and the explicit-state
//! check at a small process count.

use std::hint::black_box;

use cntabs::benchmarks::load_fixture;
use cntabs::frontend::load_spec;
use cntabs::oracle::{check, CheckOptions};
use cntabs::par::Exec;
use cntabs::pipeline::{build_counter_system, Options};
use criterion::{criterion_group, criterion_main, Criterion};

const MODES: [(&str, Exec); 2] = [
    ("parallel", Exec::Parallel),
    ("sequential", Exec::Sequential),
];

fn build(c: &mut Criterion) {
    let spec = load_spec(load_fixture("ot").unwrap().spec).unwrap();
    let mut g = c.benchmark_group("build_ot");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = Options {
            exec,
            ..Options::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| build_counter_system(black_box(&spec), &opts).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let spec = load_spec(load_fixture("ot").unwrap().spec).unwrap();
    let cs = build_counter_system(&spec, &Options::default()).unwrap();
    let mut g = c.benchmark_group("check_ot_n4");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = CheckOptions {
            exec,
            ..CheckOptions::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| check(black_box(&spec), &cs, 4, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, build, oracle);
criterion_main!(benches);
