//! Criterion benchmarks for the core algorithms; see `benches/algorithms.rs`.
