//! Criterion benchmarks for `weylcomp-core`; see `benches/`.
