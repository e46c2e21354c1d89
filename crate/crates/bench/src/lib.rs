//! Criterion benchmarks for the simulator; see `benches/solver.rs`.
