//! Criterion benchmarks for the mcsel workspace; see `benches/`.
