//! Criterion benchmarks for `floquet-core`; see `benches/kernels.rs`.
