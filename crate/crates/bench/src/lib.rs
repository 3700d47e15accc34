//! Criterion benchmarks for assembly, representer solves and the online stage.
//! Run with `cargo bench -p harmrec-bench`.
