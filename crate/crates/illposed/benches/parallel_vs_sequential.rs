use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use illposed::condensates::*;
use illposed::eit::*;
use illposed::par;
use illposed::specfun::disc_quadrature;
use std::hint::black_box;

const MODES: [(&str, bool); 2] = [("parallel", false), ("sequential", true)];

fn condensate_grid_scan(c: &mut Criterion) {
    let model = ChannelModel::new(Channel::VMinusA, &[6]).unwrap();
    let corridor = ErrorCorridor::power(8, 1.5e-3, V_MINUS_A_INTERVAL.0, V_MINUS_A_INTERVAL.1).unwrap();
    let truth: Condensates = [(6, -5.9e-3)].into_iter().collect();
    let out = synth_dataset(&SynthSpec::new(truth, 0.03, 0), &model, &corridor).unwrap();
    let problem = CondensateProblem::new(&out.dataset, &model, &corridor).unwrap();
    let grid = ParameterGrid::one(Axis { dim: 6, lo: -12e-3, hi: 0.0, points: 121 });

    let mut group = c.benchmark_group("condensate_grid_scan");
    for (name, sequential) in MODES {
        par::set_sequential(sequential);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_condensates(black_box(&problem), black_box(&grid)).unwrap())
        });
    }
    group.finish();
    par::set_sequential(false);
}

fn eit_kernel_assembly(c: &mut Criterion) {
    let mesh = DiscMesh::rings(24).unwrap();
    let patterns = trig_patterns(10);
    let sigma = BumpConductivity::three_inclusions().on_mesh(&mesh).unwrap();
    let data = simulate_dataset(&mesh, &sigma, 32, &patterns).unwrap();
    let grid = disc_quadrature(24, 64);

    let mut group = c.benchmark_group("eit_kernel_assembly");
    for (name, sequential) in MODES {
        par::set_sequential(sequential);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| linear_system(black_box(&data), &grid, None, &Phi0Mode::Analytic).unwrap())
        });
    }
    group.finish();
    par::set_sequential(false);
}

fn fem_simulation(c: &mut Criterion) {
    let mesh = DiscMesh::rings(48).unwrap();
    let patterns = trig_patterns(10);
    let sigma = BumpConductivity::three_inclusions().on_mesh(&mesh).unwrap();

    let mut group = c.benchmark_group("fem_simulation");
    group.sample_size(20);
    for (name, sequential) in MODES {
        par::set_sequential(sequential);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_dataset(black_box(&mesh), &sigma, 32, &patterns).unwrap())
        });
    }
    group.finish();
    par::set_sequential(false);
}

criterion_group!(benches, condensate_grid_scan, eit_kernel_assembly, fem_simulation);
criterion_main!(benches);
