//! Sequential vs rayon execution of the two embarrassingly parallel loops:
//! sweep cells and k-set enumeration.

use std::hint::black_box;

use binrec::experiment::{run_sweep, SweepConfig, SweepMode};
use binrec::ksets::{count_ksets, PointCloud, DEFAULT_SUBSET_CAP};
use binrec::par::Execution;
use binrec::randgen::{sample_matrix, DistributionSpec};
use binrec::recovery::Formulation;
use binrec::SolverSettings;
use criterion::{criterion_group, criterion_main, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sweep(c: &mut Criterion) {
    let mut config = SweepConfig::new(SweepMode::EtaDelta, 40, vec![Formulation::L1Box]);
    config.trials_per_cell = 10;
    config.m_values = Some(vec![8, 16, 24, 32]);
    config.k_values = Some(vec![4, 8, 12, 16]);
    let mut group = c.benchmark_group("sweep_n40");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| run_sweep(black_box(&config), exec).unwrap()));
    }
    group.finish();
}

fn ksets(c: &mut Criterion) {
    let cloud = PointCloud::from_matrix(&sample_matrix(DistributionSpec::D1, 3, 12, 7));
    let settings = SolverSettings::default();
    let mut group = c.benchmark_group("ksets_3x12_k4");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| count_ksets(black_box(&cloud), 4, true, DEFAULT_SUBSET_CAP, &settings, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, ksets);
criterion_main!(benches);
