//! Criterion benchmarks for the exact engine and the geometric kernel live in `benches/`.
