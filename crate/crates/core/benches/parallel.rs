//! Sequential against rayon execution on the three batch workloads: restart
//! search, counterexample sampling and identity checks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ic_capacity::discrete::{
    build_degraded_chain, falsify_with, maximize_expression, ConditionKind, ConditionSpec, Kernel,
    SearchConfig,
};
use ic_capacity::expr::Expression;
use ic_capacity::oracle::ck_suite;
use ic_capacity::Exec;

const POLICIES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn chain() -> ic_capacity::discrete::DiscreteIC {
    let front = Kernel::new(
        8,
        2,
        vec![
            0.9, 0.1, 0.2, 0.8, 0.3, 0.7, 0.6, 0.4, 0.5, 0.5, 0.1, 0.9, 0.75, 0.25, 0.05, 0.95,
        ],
    )
    .unwrap();
    build_degraded_chain(
        &front,
        &[Kernel::bsc(0.1).unwrap(), Kernel::bsc(0.2).unwrap()],
        &[2, 2, 2],
    )
    .unwrap()
}

fn maximize(c: &mut Criterion) {
    let ch = chain();
    let expr = Expression::nested_chain(3);
    let mut g = c.benchmark_group("maximize");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let cfg = SearchConfig {
            restarts: 32,
            exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| maximize_expression(&ch, &expr, &cfg).unwrap())
        });
    }
    g.finish();
}

fn falsify(c: &mut Criterion) {
    let ch = chain();
    let spec = ConditionSpec::new(ConditionKind::ChainLessNoisy);
    let mut g = c.benchmark_group("falsify");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| falsify_with(&ch, &spec, 2000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn identity(c: &mut Criterion) {
    let mut g = c.benchmark_group("ck");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ck_suite(3, 100, 7, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, maximize, falsify, identity);
criterion_main!(benches);
