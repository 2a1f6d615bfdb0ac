//! Benchmarks for uhlmann-core live under `benches/`.
