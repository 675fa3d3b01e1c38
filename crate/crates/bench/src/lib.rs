//! Criterion benchmarks for the frontlab kernels; see `benches/`.
