//! Criterion benchmarks for marklab; see `benches/`.
