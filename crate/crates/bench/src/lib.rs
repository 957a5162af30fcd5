//! Criterion benchmarks for koblab; see `benches/`.
