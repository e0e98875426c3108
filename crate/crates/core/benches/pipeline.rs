use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpverify::eval::{score_pairs, Scenario, SyntheticScenario};
use fpverify::orientation::estimate_block_directions_with;
use fpverify::store::Store;
use fpverify::synth::{gen_synthetic_minutiae, gen_synthetic_orientation, render_field, SynthConfig};
use fpverify::{Execution, FingerprintClass};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn pair_scoring(c: &mut Criterion) {
    let scenario = Scenario {
        k: 5,
        pairs: SyntheticScenario { genuine: 100, imposter: 100, seed: 3, ..Default::default() }.generate().unwrap(),
    };
    let mut group = c.benchmark_group("score_pairs");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| score_pairs(black_box(&scenario), mode))
        });
    }
    group.finish();
}

fn block_directions(c: &mut Criterion) {
    let cfg = SynthConfig { class: FingerprintClass::Whorl, disk_radius: 230.0, ..Default::default() };
    let img = render_field(&gen_synthetic_orientation(&cfg).0);
    let mut group = c.benchmark_group("block_directions");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| estimate_block_directions_with(black_box(&img), mode).unwrap())
        });
    }
    group.finish();
}

fn identify(c: &mut Criterion) {
    let mut store = Store::in_memory();
    let sets: Vec<_> = (0..300).map(|s| gen_synthetic_minutiae(&SynthConfig { seed: s, ..Default::default() }).unwrap()).collect();
    for (i, s) in sets.iter().enumerate() {
        store.enroll(&format!("f{i}"), s, 5, None).unwrap();
    }
    let mut group = c.benchmark_group("identify");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| store.identify_with(black_box(&sets[17]), 12.0, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pair_scoring, block_directions, identify);
criterion_main!(benches);
