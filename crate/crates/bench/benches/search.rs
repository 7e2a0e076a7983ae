use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcsel_core::oracle::{optimal_value, BayesBelief};
use mcsel_core::rng::PayoffStream;
use mcsel_core::tree::{
    hybrid_search, BanditTree, BanditTreeSpec, SearchBudget, SearchConfig, SearchRng,
};

fn tree_search(c: &mut Criterion) {
    let tree = BanditTree::new(
        BanditTreeSpec {
            depth: 2,
            branching: 5,
        },
        42,
        0,
    )
    .unwrap();
    let mut group = c.benchmark_group("tree_search");
    for (name, cfg) in [
        ("uct", SearchConfig::uct()),
        ("hybrid", SearchConfig::hybrid(0.0)),
    ] {
        group.bench_with_input(BenchmarkId::new(name, 1000), &cfg, |b, cfg| {
            b.iter(|| {
                let mut rng = SearchRng::new(PayoffStream::new(42, 0));
                hybrid_search(&tree, SearchBudget::new(1000), cfg, &mut rng).unwrap()
            })
        });
    }
    group.finish();
}

fn metalevel_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimal_value");
    group.sample_size(20);
    for budget in [6u32, 10] {
        group.bench_with_input(BenchmarkId::new("arms3", budget), &budget, |b, &budget| {
            b.iter(|| optimal_value(&BayesBelief::uniform(3), budget, 0.0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tree_search, metalevel_dp);
criterion_main!(benches);
