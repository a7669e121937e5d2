use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use scissors_core::lfunc::{dedekind_euler, IntPoly};
use scissors_core::qfield::int;
use scissors_core::tiling::{check_proper, ConvexPolytope, ProductPolytope};
use scissors_core::volume::{regular_ideal_tetrahedron, vol_numeric_with, NumericOptions};
use scissors_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn qmc_volume(c: &mut Criterion) {
    let s = regular_ideal_tetrahedron();
    let mut group = c.benchmark_group("qmc_volume");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = NumericOptions { exec, ..NumericOptions::new(200_000, 0) };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| vol_numeric_with(&s, &opts).unwrap()));
    }
    group.finish();
}

fn euler_product(c: &mut Criterion) {
    let f = IntPoly::parse("x^4 - x^2 - 1").unwrap();
    let mut group = c.benchmark_group("euler_product");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| dedekind_euler(&f, 3.0, 200_000, exec).unwrap()));
    }
    group.finish();
}

fn proper_check(c: &mut Criterion) {
    let cell = |lo: [i64; 2]| {
        ProductPolytope::new(vec![ConvexPolytope::cuboid(&[int(lo[0]), int(lo[1])], &[int(lo[0] + 1), int(lo[1] + 1)]).unwrap()])
    };
    let tiles: Vec<ProductPolytope> = (0..4).flat_map(|i| (0..4).map(move |j| cell([i, j]))).collect();
    let mut group = c.benchmark_group("check_proper");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| check_proper(&tiles, None, 2_000, 0, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, qmc_volume, euler_product, proper_check);
criterion_main!(benches);
