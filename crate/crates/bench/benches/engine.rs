use criterion::{criterion_group, criterion_main};

criterion_group!(benches, lpm_shapley_bench::engine);
criterion_main!(benches);
