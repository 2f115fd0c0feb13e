//! Sequential versus rayon-parallel execution of the batch hot paths.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qultsf::data::{make_splits, standardize, synth, WindowDataset};
use qultsf::exec::Execution;
use qultsf::metrics::evaluate;
use qultsf::models::{Model, ModelKind, ModelSpec};
use qultsf::train::batch_gradient;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn modes() -> Vec<Execution> {
    if cfg!(feature = "parallel") {
        vec![Execution::Sequential, Execution::Parallel]
    } else {
        vec![Execution::Sequential]
    }
}

fn model(kind: ModelKind, l: usize, t: usize, qubits: usize) -> Model {
    let spec = ModelSpec {
        qubits,
        ..ModelSpec::new(kind, l, t)
    };
    Model::init(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

fn bench(c: &mut Criterion) {
    let raw = synth::weather_like(4_000, 4, 0).unwrap();
    let split = make_splits(raw.num_timestamps(), (0.7, 0.1, 0.2)).unwrap();
    let (table, _) = standardize(&raw, &split).unwrap();
    let (l, t) = (96, 24);
    let train = WindowDataset::new(&table, split.train.clone(), l, t).unwrap();
    let test = WindowDataset::new(&table, split.test.clone(), l, t).unwrap();

    let qultsf = model(ModelKind::Qultsf, l, t, 7);
    let batch: Vec<usize> = (0..256).map(|i| i * 37 % train_len(&train)).collect();
    let mut group = c.benchmark_group("qultsf_batch_gradient_256");
    group.sample_size(20);
    for mode in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| batch_gradient(black_box(&qultsf), &train, &batch, 4, mode).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("evaluate_test_split");
    group.sample_size(10);
    for kind in [ModelKind::Qultsf, ModelKind::Dlinear] {
        let m = model(kind, l, t, 7);
        for mode in modes() {
            group.bench_with_input(BenchmarkId::new(kind.name(), format!("{mode:?}")), &mode, |b, &mode| {
                b.iter(|| evaluate(black_box(&m), &test, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn train_len(d: &WindowDataset<'_>) -> usize {
    use qultsf::data::SampleSet;
    d.len()
}

criterion_group!(benches, bench);
criterion_main!(benches);
