use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use faultbench::bench::BenchReport;
use faultbench::morph;
use faultbench::volume_io::{read_mask_png, read_npy_grid, write_mask_png, write_npy_volume, write_segy};
use faultbench::{FaultMask, SeismicVolume, SourceFormat};
use ndarray::Array3;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_faultbench"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_png(path: &Path, mask: &FaultMask) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, write_mask_png(mask).unwrap()).unwrap();
}

fn bar(h: usize, w: usize, col: usize, width: usize) -> FaultMask {
    let pts: Vec<_> = (2..h - 2)
        .flat_map(|r| (col..col + width).map(move |c| (r, c)))
        .collect();
    FaultMask::from_points(h, w, &pts)
}

fn volume(scale: f32) -> SeismicVolume {
    let data = Array3::from_shape_fn((3, 4, 20), |(i, x, s)| scale * ((i * 7 + x * 3 + s) as f32 * 0.37).sin());
    SeismicVolume::new(data, 4000, SourceFormat::NpyArray).unwrap()
}

fn fixture_dirs(tmp: &TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
    let gt = tmp.path().join("gt");
    let pred = tmp.path().join("pred");
    for (i, col) in [4usize, 9, 13].iter().enumerate() {
        write_png(&gt.join(format!("s{i}.png")), &bar(24, 20, *col, 1));
        write_png(&pred.join(format!("s{i}.png")), &bar(24, 20, col + i, 1));
    }
    (pred, gt)
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "ingest",
        "normalize",
        "tile",
        "stitch",
        "standardize",
        "threshold",
        "eval",
        "simulate",
        "report",
        "stats",
    ] {
        let out = ok(&[sub, "--help"]);
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
    ok(&["--help"]);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["eval", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn eval_against_itself_is_perfect() {
    let tmp = TempDir::new().unwrap();
    let (_, gt) = fixture_dirs(&tmp);
    let out = ok(&["eval", "--pred", p(&gt), "--gt", p(&gt), "--format", "json"]);
    let reports: Vec<BenchReport> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].rows.len(), 3);
    assert!(reports[0].rows.iter().all(|r| r.metrics.dice == 1.0));
}

#[test]
fn eval_without_common_stems_is_a_domain_error() {
    let tmp = TempDir::new().unwrap();
    let (pred, _) = fixture_dirs(&tmp);
    let other = tmp.path().join("other");
    write_png(&other.join("zzz.png"), &bar(24, 20, 3, 1));
    let out = run(&["eval", "--pred", p(&pred), "--gt", p(&other)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no prediction"));
}

#[test]
fn eval_is_deterministic_across_job_counts() {
    let tmp = TempDir::new().unwrap();
    let (pred, gt) = fixture_dirs(&tmp);
    let a = ok(&["eval", "--pred", p(&pred), "--gt", p(&gt), "--format", "csv", "--jobs", "1"]);
    let b = ok(&["eval", "--pred", p(&pred), "--gt", p(&gt), "--format", "csv", "--jobs", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn standardize_directory_matches_library() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("in");
    let thick = bar(24, 20, 5, 4);
    write_png(&src.join("a.png"), &thick);
    let dst = tmp.path().join("out");
    ok(&["standardize", "--in", p(&src), "--out", p(&dst)]);
    let got = read_mask_png(&fs::read(dst.join("a.png")).unwrap()).unwrap();
    assert_eq!(got, morph::standardize(&thick));
}

#[test]
fn ingest_round_trip_and_stats() {
    let tmp = TempDir::new().unwrap();
    let sgy = tmp.path().join("v.sgy");
    fs::write(&sgy, write_segy(&volume(1.0), 5).unwrap()).unwrap();
    let npy = tmp.path().join("v.npy");
    ok(&["ingest", "--in", p(&sgy), "--out", p(&npy)]);
    let back = faultbench::volume_io::read_npy_stack(&fs::read(&npy).unwrap()).unwrap();
    assert_eq!(back, volume(1.0).into_samples());

    let quiet = tmp.path().join("quiet.npy");
    fs::write(&quiet, write_npy_volume(&volume(0.1)).unwrap()).unwrap();
    let std_of = |path: &Path| -> f64 {
        let out = ok(&["stats", "--volume", p(path)]);
        let text = String::from_utf8(out.stdout).unwrap();
        let line = text.lines().find(|l| l.starts_with("std ")).unwrap();
        line[4..].parse().unwrap()
    };
    assert!(std_of(&quiet) < std_of(&npy));
}

#[test]
fn tile_then_stitch_is_identity() {
    let tmp = TempDir::new().unwrap();
    let vol = tmp.path().join("v.npy");
    fs::write(&vol, write_npy_volume(&volume(1.0)).unwrap()).unwrap();
    let tiles = tmp.path().join("tiles");
    ok(&["tile", "--in", p(&vol), "--out", p(&tiles), "--window", "8", "--stride", "5"]);
    let sections = tmp.path().join("sections");
    ok(&["stitch", "--in", p(&tiles), "--out", p(&sections)]);
    let v = volume(1.0);
    for i in 0..3 {
        let grid = read_npy_grid(&fs::read(sections.join(format!("inline_{i:04}.npy"))).unwrap()).unwrap();
        assert_eq!(grid.dim(), (20, 4));
        for ((s, x), &g) in grid.indexed_iter() {
            assert!((g - v.samples()[[i, x, s]] as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn config_file_with_flag_precedence() {
    let tmp = TempDir::new().unwrap();
    let (pred, gt) = fixture_dirs(&tmp);
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# thresholds\ngrid_step = 0.5\nno-standardize = true\n").unwrap();
    let curve_len = |extra: &[&str]| {
        let mut args = vec!["threshold", "--pred", p(&pred), "--gt", p(&gt), "--config", p(&cfg)];
        args.extend_from_slice(extra);
        let out = ok(&args);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["curve"].as_array().unwrap().len()
    };
    assert_eq!(curve_len(&[]), 1);
    assert_eq!(curve_len(&["--grid-step", "0.25"]), 3);

    fs::write(&cfg, "grid_step = 0.5\ncolour = blue\n").unwrap();
    let out = run(&["threshold", "--pred", p(&pred), "--gt", p(&gt), "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_ranks_saved_runs() {
    let tmp = TempDir::new().unwrap();
    let (pred, gt) = fixture_dirs(&tmp);
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    ok(&["eval", "--pred", p(&pred), "--gt", p(&gt), "--name", "shifted", "--test-set", "T", "--out", p(&a)]);
    ok(&["eval", "--pred", p(&gt), "--gt", p(&gt), "--name", "exact", "--test-set", "T", "--out", p(&b)]);
    let out = ok(&["report", "--in", p(&a), p(&b), "--format", "md"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("| exact | 1.000±0.000 |"), "{text}");
    assert!(text.contains("| T | exact | - | shifted |"), "{text}");
}

#[test]
fn simulate_writes_table_and_masks() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("sim");
    ok(&["simulate", "--experiment", "sparsity", "--trials", "2", "--seed", "3", "--out", p(&out_dir)]);
    let csv = fs::read_to_string(out_dir.join("sparsity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    for f in ["few_clean.png", "few_noisy.png", "many_clean.png", "many_noisy.png"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let again = tmp.path().join("sim2");
    ok(&["simulate", "--experiment", "sparsity", "--trials", "2", "--seed", "3", "--out", p(&again)]);
    assert_eq!(csv, fs::read_to_string(again.join("sparsity.csv")).unwrap());
}
