//! Criterion benchmarks for the scheduling and learning kernels live in `benches/`.
