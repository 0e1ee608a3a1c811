//! Benchmarks for the core kernels live in `benches/`; this crate has no API.
