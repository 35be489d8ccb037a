//! Criterion benchmarks for the moql crates live under `benches/`.
