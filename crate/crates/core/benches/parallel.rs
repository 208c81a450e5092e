//! Parallel against sequential execution on the data-parallel hot loops.

use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sweep_core::analysis::{ball_slide, run_suite};
use sweep_core::catchup::{convergence_study, Reference};
use sweep_core::crowd::corridor_set;
use sweep_core::projection::project_disk_config;
use sweep_core::{Execution, SolverOptions, Vector};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn multistart_projection(c: &mut Criterion) {
    let set = corridor_set(1.0, 1e-3).unwrap();
    let x = Vector::new(vec![1.0 - 1e-3, 0.0, 3.0 - 1e-3, 0.0]).unwrap();
    let mut group = c.benchmark_group("multistart_projection");
    for (name, mode) in MODES {
        let opts = SolverOptions { multistart: 64, ..SolverOptions::default() }.with_execution(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| project_disk_config(&set, &x, &[], &opts).unwrap())
        });
    }
    group.finish();
}

fn convergence(c: &mut Criterion) {
    let p = ball_slide(3.0 * PI / 4.0, 0.5).unwrap();
    let reference = Reference::circle_slide(&p).unwrap();
    let ns = [40, 80, 160, 320, 640];
    let mut group = c.benchmark_group("convergence_study");
    group.sample_size(20);
    for (name, mode) in MODES {
        let opts = SolverOptions::default().with_execution(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| convergence_study(&p, &ns, &reference, &opts).unwrap())
        });
    }
    group.finish();
}

fn moreau_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("moreau_suite");
    group.sample_size(10);
    for (name, mode) in MODES {
        let opts = SolverOptions::default().with_execution(mode);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_suite("moreau", &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, multistart_projection, convergence, moreau_suite);
criterion_main!(benches);
