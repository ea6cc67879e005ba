//! Criterion benchmarks for the fractional operator routes; see `benches/routes.rs`.
