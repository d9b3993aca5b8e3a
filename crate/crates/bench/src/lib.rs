//! Criterion benchmarks for `hdmanova`; see `benches/bootstrap.rs`.
