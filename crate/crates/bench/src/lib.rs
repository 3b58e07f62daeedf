//! Criterion benchmarks for dctfuse live under `benches/`.
