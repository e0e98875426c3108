use fpverify::orientation::{FeatureVector, FEATURE_LEN};
use fpverify::som::{train_msom_observed, train_som_observed, InitMode, SomMap, TrainConfig};
use fpverify::synth::class_dataset;

fn trajectory(train: impl FnOnce(&mut dyn FnMut(usize, &SomMap))) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    train(&mut |_, map| out.push(map.weights().to_vec()));
    out
}

#[test]
fn msom_with_full_certainty_is_som() {
    let data: Vec<FeatureVector> = class_dataset(3, 9, 200.0)
        .into_iter()
        .map(|v| FeatureVector::new(v.directions, vec![1.0; FEATURE_LEN], v.class_label))
        .collect();
    for seed in 0..3 {
        let cfg = TrainConfig { epochs: 20, seed, init_mode: InitMode::Zero, ..Default::default() };
        let a = trajectory(|obs| {
            train_som_observed(&data, 5, &cfg, obs).unwrap();
        });
        let b = trajectory(|obs| {
            train_msom_observed(&data, 5, &cfg, obs).unwrap();
        });
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}

#[test]
fn map_file_round_trip() {
    let data = class_dataset(2, 1, 200.0);
    let map = fpverify::som::train_som(&data, 4, &TrainConfig { epochs: 10, ..Default::default() }).unwrap();
    let text = map.to_text();
    let back = SomMap::from_text(&text).unwrap();
    assert_eq!(back.to_text(), text);
    for v in &data {
        assert_eq!(back.classify(&v.directions, None).unwrap(), map.classify(&v.directions, None).unwrap());
    }
}
