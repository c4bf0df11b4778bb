mod common;

use std::fs;
use std::path::Path;

use common::*;
use faultbench::bench::{evaluate_run, EvalOptions, SplitSpec};
use faultbench::morph::standardize;
use faultbench::volume_io::{write_mask_png, write_npy_probability};
use faultbench::{Error, FaultMask, ProbabilityMap};
use tempfile::TempDir;

fn put(dir: &Path, name: &str, mask: &FaultMask) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join(name), write_mask_png(mask).unwrap()).unwrap();
}

fn fixture() -> (TempDir, Vec<(FaultMask, FaultMask)>) {
    let tmp = TempDir::new().unwrap();
    let mut r = rng(7);
    let pairs: Vec<_> = (0..3)
        .map(|_| (thick_strokes(&mut r, 20, 24), thick_strokes(&mut r, 20, 24)))
        .collect();
    for (i, (p, g)) in pairs.iter().enumerate() {
        put(&tmp.path().join("pred"), &format!("sec{i}.png"), p);
        put(&tmp.path().join("gt"), &format!("sec{i}.png"), g);
    }
    (tmp, pairs)
}

#[test]
fn three_pair_fixture_matches_oracles() {
    let (tmp, pairs) = fixture();
    let run = evaluate_run(&tmp.path().join("pred"), &tmp.path().join("gt"), &EvalOptions::default()).unwrap();
    assert_eq!(run.records.len(), 3);
    assert!(run.failures.is_empty() && run.unmatched_gt.is_empty() && run.unmatched_pred.is_empty());
    for (rec, (p, g)) in run.records.iter().zip(&pairs) {
        let (p, g) = (standardize(p), standardize(g));
        assert!((rec.metrics.dice - brute_dice(&p, &g)).abs() < 1e-12);
        assert!((rec.metrics.bcd.unwrap() - brute_bcd(&p, &g).unwrap()).abs() < 1e-9);
        assert!((rec.metrics.modified_hausdorff.unwrap() - brute_mhd(&p, &g).unwrap()).abs() < 1e-9);
    }
    let ids: Vec<_> = run.records.iter().map(|r| r.section_id.as_str()).collect();
    assert_eq!(ids, ["sec0", "sec1", "sec2"]);
}

#[test]
fn self_evaluation_is_perfect() {
    let (tmp, _) = fixture();
    let gt = tmp.path().join("gt");
    let run = evaluate_run(&gt, &gt, &EvalOptions::default()).unwrap();
    assert!(run.records.iter().all(|r| r.metrics.dice == 1.0));
}

#[test]
fn disjoint_stems_find_no_pairs() {
    let (tmp, pairs) = fixture();
    put(&tmp.path().join("other"), "x.png", &pairs[0].0);
    let err = evaluate_run(&tmp.path().join("other"), &tmp.path().join("gt"), &EvalOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NoPairsFound));
}

#[test]
fn mismatched_pair_is_recorded_not_fatal() {
    let (tmp, _) = fixture();
    put(&tmp.path().join("pred"), "sec1.png", &FaultMask::from_points(5, 5, &[(2, 2)]));
    put(&tmp.path().join("pred"), "extra.png", &FaultMask::from_points(5, 5, &[(2, 2)]));
    let run = evaluate_run(&tmp.path().join("pred"), &tmp.path().join("gt"), &EvalOptions::default()).unwrap();
    assert_eq!(run.records.len(), 2);
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].section_id, "sec1");
    assert_eq!(run.unmatched_pred, ["extra"]);
}

#[test]
fn probability_maps_are_thresholded() {
    let (tmp, pairs) = fixture();
    let probs = tmp.path().join("probs");
    fs::create_dir_all(&probs).unwrap();
    for (i, (_, g)) in pairs.iter().enumerate() {
        let p = ProbabilityMap::new(g.grid().mapv(|v| if v { 0.7 } else { 0.2 })).unwrap();
        fs::write(probs.join(format!("sec{i}.npy")), write_npy_probability(&p).unwrap()).unwrap();
    }
    let opts = |t| EvalOptions {
        threshold: t,
        ..EvalOptions::default()
    };
    let run = evaluate_run(&probs, &tmp.path().join("gt"), &opts(0.5)).unwrap();
    assert!(run.records.iter().all(|r| r.metrics.dice == 1.0));
    let run = evaluate_run(&probs, &tmp.path().join("gt"), &opts(0.1)).unwrap();
    assert!(run.records.iter().all(|r| r.metrics.dice < 1.0));
}

#[test]
fn split_restricts_to_test_sections() {
    let (tmp, _) = fixture();
    let opts = EvalOptions {
        split: Some(SplitSpec {
            name: "custom".into(),
            train_indices: vec![0, 1],
            test_indices: vec![2],
        }),
        ..EvalOptions::default()
    };
    let run = evaluate_run(&tmp.path().join("pred"), &tmp.path().join("gt"), &opts).unwrap();
    assert_eq!(run.records.len(), 1);
    assert_eq!(run.records[0].section_id, "sec2");
}
