use criterion::{criterion_group, criterion_main, Criterion};
use latticeband_bench::{paper_path, penta2d};
use latticeband_core::{
    band_gaps, band_structure, modes_at, oracle_check, BlochAssembly, Wavevector,
};
use std::hint::black_box;

fn reduced_stiffness(c: &mut Criterion) {
    let assembly = BlochAssembly::new(&penta2d());
    let mu = Wavevector::new(vec![0.7, -1.3]);
    c.bench_function("penta2d reduced stiffness", |b| {
        b.iter(|| assembly.reduced_stiffness(black_box(&mu)))
    });
    c.bench_function("penta2d modes at one wavevector", |b| {
        b.iter(|| modes_at(&assembly, black_box(&mu), false).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let model = penta2d();
    let path = paper_path(101);
    c.bench_function("penta2d band structure, 301 samples", |b| {
        b.iter(|| band_structure(&model, &path).unwrap())
    });
    c.bench_function("penta2d gaps, 32x32 grid", |b| {
        b.iter(|| band_gaps(&model, 32).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let model = penta2d();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("penta2d 5x5 supercell", |b| {
        b.iter(|| oracle_check(&model, &[5, 5]).unwrap())
    });
    group.finish();
}

criterion_group!(benches, reduced_stiffness, sweeps, oracle);
criterion_main!(benches);
