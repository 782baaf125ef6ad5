//! Benchmarks for pso-trust live under `benches/`.
