//! Criterion benchmarks of the dynamics engines; see `benches/engines.rs`.
