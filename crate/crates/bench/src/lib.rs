//! Intentionally empty; the criterion benchmarks in `benches/` are the crate.
