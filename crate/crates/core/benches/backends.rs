use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vcmc::aggregation::{aggregate_with, gaussian_weights};
use vcmc::exec::Backend;
use vcmc::models::{ModelSpec, ProbitDesign, ProbitGenerator, ProbitModel, TemperingMode};
use vcmc::samplers::{partition_data, run_parallel_with, SamplerConfig};
use vcmc::variational::{EntropyMode, Objective, ObjectiveConfig, SampleBatch};

fn backends() -> Vec<(&'static str, Backend)> {
    vec![
        ("sequential", Backend::Sequential),
        #[cfg(feature = "parallel")]
        ("rayon", Backend::Rayon),
    ]
}

fn probit_model(n: usize) -> ModelSpec {
    let gen = ProbitGenerator {
        n,
        beta: vec![-0.5, 1.0, 0.5, -1.0, 0.25],
        design: ProbitDesign::Gaussian,
        intercept: true,
        seed: 3,
    };
    let (x, y) = gen.generate().unwrap();
    ModelSpec::Probit(ProbitModel::new(x, y, 1.0).unwrap())
}

fn bench(c: &mut Criterion) {
    let k = 8;
    let model = probit_model(2000);
    let parts = partition_data(model.len(), k, 1).unwrap();
    let mode = TemperingMode::Subposterior { k };
    let cfg = SamplerConfig {
        iterations: 300,
        burn_in: 50,
        thin: 1,
        seed: 7,
        ..Default::default()
    };
    let samples = run_parallel_with(Backend::Sequential, &model, &parts, mode, &cfg).unwrap();
    let weights = gaussian_weights(&samples).unwrap();

    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    for (name, backend) in backends() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &backend, |b, &be| {
            b.iter(|| run_parallel_with(be, &model, &parts, mode, &cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("aggregation");
    for (name, backend) in backends() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &backend, |b, &be| {
            b.iter(|| aggregate_with(be, &weights, &samples).unwrap())
        });
    }
    group.finish();

    let ModelSpec::Probit(pm) = &model else { unreachable!() };
    let moments = vcmc::models::compute_moments(&samples).unwrap();
    let idx: Vec<usize> = (0..ObjectiveConfig::default().batch_size).collect();
    let batch = SampleBatch::from_indices(&samples, &idx).unwrap();
    let mut group = c.benchmark_group("objective_gradient");
    for (name, backend) in backends() {
        let objective = Objective::probit(pm, moments.clone(), EntropyMode::RelaxedMean).with_backend(backend);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| objective.value_and_grad(&weights, &batch).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
