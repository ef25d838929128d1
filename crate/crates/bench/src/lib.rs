//! Criterion benchmarks for the `phigamma` library; see `benches/`.
