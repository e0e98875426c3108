use fpverify::store::{Store, StoreError, MANIFEST};
use fpverify::synth::{gen_synthetic_minutiae, SynthConfig};
use fpverify::{Decision, FingerprintClass};

#[test]
fn reopened_store_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let texts: Vec<String> = {
        let mut store = Store::open(dir.path()).unwrap();
        for seed in 0..12u64 {
            let set = gen_synthetic_minutiae(&SynthConfig { seed, n_minutiae: 20 + seed as usize, ..Default::default() }).unwrap();
            let class = (seed % 2 == 0).then_some(FingerprintClass::RightLoop);
            store.enroll(&format!("user{seed}.finger"), &set, 3 + (seed as usize % 4), class).unwrap();
        }
        store.records().map(|r| r.to_text()).collect()
    };
    let reopened = Store::open(dir.path()).unwrap();
    let again: Vec<String> = reopened.records().map(|r| r.to_text()).collect();
    assert_eq!(texts, again);

    // a second generation of save/load is a fixed point as well
    let copy = tempfile::tempdir().unwrap();
    let mut second = Store::open(copy.path()).unwrap();
    let set = gen_synthetic_minutiae(&SynthConfig::default()).unwrap();
    second.enroll("x", &set, 5, None).unwrap();
    let before = std::fs::read(copy.path().join(MANIFEST)).unwrap();
    drop(second);
    let third = Store::open(copy.path()).unwrap();
    assert_eq!(std::fs::read(copy.path().join(MANIFEST)).unwrap(), before);
    let v = third.verify(&set, "x", 12.0).unwrap();
    assert_eq!(v.decision, Decision::Accept);
}

#[test]
fn duplicate_ids_survive_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let set = gen_synthetic_minutiae(&SynthConfig::default()).unwrap();
    Store::open(dir.path()).unwrap().enroll("a", &set, 5, None).unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    assert!(matches!(store.enroll("a", &set, 5, None), Err(StoreError::DuplicateId(_))));
}

#[test]
fn missing_record_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let set = gen_synthetic_minutiae(&SynthConfig::default()).unwrap();
    Store::open(dir.path()).unwrap().enroll("a", &set, 5, None).unwrap();
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "rec") {
            std::fs::remove_file(p).unwrap();
        }
    }
    assert!(matches!(Store::open(dir.path()), Err(StoreError::Io(_))));
}
