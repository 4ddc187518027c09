//! Criterion benchmarks for the hot numeric kernels live under `benches/`.
