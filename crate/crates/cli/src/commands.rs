use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use faultbench::bench::{
    aggregate_with, emit_report, evaluate_run, load_mask, rank_configs, AggregateOptions, BenchReport,
    DegeneratePolicy, EvalOptions, Rank, ReportFormat, SplitPreset, SplitSpec,
};
use faultbench::faultlab::{sparsity_masks, Arm, FaultlabDefaults};
use faultbench::morph::{standardize_with, StandardizeOptions};
use faultbench::preprocess::{
    extract_section, normalizers, stitch, tile, volume_stats, PatchGeometry, SectionAxis, TilingSpec,
};
use faultbench::threshold::{apply_threshold, grid_from_step, ods_search, OdsOptions, ScoreMode};
use faultbench::volume_io::{read_npy_stack, write_npy_grid, write_npy_stack};
use ndarray::{Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::io::{mask_files, read_probability, read_volume, write_file, write_mask, write_volume};
use crate::{
    AxisArg, Cli, Command, EvalArgs, Experiment, IngestArgs, NormalizeArgs, ReportArgs, SimulateArgs,
    StandardizeArgs, StatsArgs, StitchArgs, ThresholdArgs, TileArgs, UsageError,
};

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Normalize(a) => normalize(a),
        Command::Tile(a) => tile_volume(a),
        Command::Stitch(a) => stitch_patches(a),
        Command::Standardize(a) => standardize(a),
        Command::Threshold(a) => threshold(a),
        Command::Eval(a) => eval(a),
        Command::Simulate(a) => simulate(a, cli.seed),
        Command::Report(a) => report(a),
        Command::Stats(a) => stats(a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let v = read_volume(&a.volume)?;
    write_volume(&v, &a.out, a.format_code, a.volume.endian)?;
    let (i, x, s) = v.dims();
    println!("{}: {i} inlines x {x} crosslines x {s} samples", a.out.display());
    Ok(())
}

fn normalize(a: &NormalizeArgs) -> Result<()> {
    let normalizer = normalizers().get(&a.mode).map_err(|e| usage(e.to_string()))?;
    let v = normalizer.normalize(&read_volume(&a.volume)?)?;
    write_volume(&v, &a.out, 5, a.volume.endian)
}

#[derive(Debug, Serialize, Deserialize)]
struct SectionEntry {
    axis: SectionAxis,
    index: usize,
    height: usize,
    width: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct PatchEntry {
    section: usize,
    #[serde(flatten)]
    geometry: PatchGeometry,
}

/// Sidecar describing where each row of `patches.npy` came from.
#[derive(Debug, Serialize, Deserialize)]
struct TileIndex {
    tiling: TilingSpec,
    sections: Vec<SectionEntry>,
    patches: Vec<PatchEntry>,
}

const PATCHES_NPY: &str = "patches.npy";
const PATCHES_JSON: &str = "patches.json";

fn tile_volume(a: &TileArgs) -> Result<()> {
    let spec = TilingSpec::square(a.window, a.stride, a.pad.parse().map_err(|e: faultbench::Error| usage(e.to_string()))?);
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let v = read_volume(&a.volume)?;
    let (axis, count) = match a.axis {
        AxisArg::Inline => (SectionAxis::Inline, v.inline_count()),
        AxisArg::Crossline => (SectionAxis::Crossline, v.crossline_count()),
    };
    let mut index = TileIndex {
        tiling: spec,
        sections: Vec::new(),
        patches: Vec::new(),
    };
    let mut views = Vec::new();
    for k in 0..count {
        let section = extract_section(&v, axis, k)?;
        let (height, width) = section.dims();
        index.sections.push(SectionEntry {
            axis,
            index: k,
            height,
            width,
        });
        for p in tile(&section, &spec)? {
            index.patches.push(PatchEntry {
                section: k,
                geometry: p.geometry(),
            });
            views.push(p.values);
        }
    }
    let stack_views: Vec<_> = views.iter().map(|p| p.view()).collect();
    let stack = ndarray::stack(Axis(0), &stack_views)?;
    write_file(&a.out.join(PATCHES_NPY), &write_npy_stack(stack.view())?)?;
    write_file(&a.out.join(PATCHES_JSON), serde_json::to_string_pretty(&index)?.as_bytes())?;
    println!("{} patches from {} sections", index.patches.len(), index.sections.len());
    Ok(())
}

fn axis_name(axis: SectionAxis) -> &'static str {
    match axis {
        SectionAxis::Inline => "inline",
        SectionAxis::Crossline => "crossline",
    }
}

fn stitch_patches(a: &StitchArgs) -> Result<()> {
    let index: TileIndex = serde_json::from_slice(
        &fs::read(a.input.join(PATCHES_JSON)).with_context(|| format!("reading {PATCHES_JSON}"))?,
    )?;
    let stack_path = a.pred.clone().unwrap_or_else(|| a.input.join(PATCHES_NPY));
    let stack: Array3<f32> = read_npy_stack(&fs::read(&stack_path).with_context(|| format!("reading {}", stack_path.display()))?)?;
    if stack.len_of(Axis(0)) != index.patches.len() {
        bail!(
            "{} holds {} patches but the index lists {}",
            stack_path.display(),
            stack.len_of(Axis(0)),
            index.patches.len()
        );
    }
    for (k, section) in index.sections.iter().enumerate() {
        let parts: Vec<(PatchGeometry, ndarray::Array2<f64>)> = index
            .patches
            .iter()
            .enumerate()
            .filter(|(_, p)| p.section == k)
            .map(|(i, p)| (p.geometry, stack.index_axis(Axis(0), i).mapv(f64::from)))
            .collect();
        let full = stitch(&parts, (section.height, section.width))?;
        let name = format!("{}_{:04}.npy", axis_name(section.axis), section.index);
        write_file(&a.out.join(name), &write_npy_grid(full.view())?)?;
    }
    println!("{} sections written to {}", index.sections.len(), a.out.display());
    Ok(())
}

fn standardize(a: &StandardizeArgs) -> Result<()> {
    let opts = StandardizeOptions {
        element: a.element.parse().map_err(|e: faultbench::Error| usage(e.to_string()))?,
        dilation_passes: a.dilations,
    };
    let jobs: Vec<(PathBuf, PathBuf)> = if a.input.is_dir() {
        mask_files(&a.input)?
            .into_values()
            .map(|p| {
                let out = a.out.join(p.file_name().expect("listed files have names"));
                (p, out)
            })
            .collect()
    } else {
        vec![(a.input.clone(), a.out.clone())]
    };
    for (src, dst) in &jobs {
        let mask = load_mask(src, a.threshold).with_context(|| format!("reading {}", src.display()))?;
        write_mask(&standardize_with(&mask, &opts), dst)?;
    }
    println!("standardized {} masks", jobs.len());
    Ok(())
}

fn threshold(a: &ThresholdArgs) -> Result<()> {
    let grid = grid_from_step(a.grid_step).map_err(|e| usage(e.to_string()))?;
    let preds = mask_files(&a.pred)?;
    let gts = mask_files(&a.gt)?;
    let stems: Vec<&String> = preds.keys().filter(|k| gts.contains_key(*k)).collect();
    if stems.is_empty() {
        return Err(faultbench::Error::NoPairsFound.into());
    }
    let mut maps = Vec::with_capacity(stems.len());
    let mut labels = Vec::with_capacity(stems.len());
    for s in &stems {
        maps.push(read_probability(&preds[*s])?);
        labels.push(load_mask(&gts[*s], 0.5)?);
    }
    let opts = OdsOptions {
        standardize: !a.no_standardize,
        mode: if a.macro_dice { ScoreMode::Macro } else { ScoreMode::Micro },
    };
    let result = ods_search(&maps, &labels, &grid, &opts)?;
    if let Some(out) = &a.out {
        for (stem, mask) in stems.iter().zip(apply_threshold(&maps, &result, opts.standardize)) {
            write_mask(&mask, &out.join(format!("{stem}.png")))?;
        }
    }
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

/// `cracks`, `thebe`, `faultseg3d`, or `custom:<file.json>`.
fn resolve_split(text: &str, gt_dir: &Path) -> Result<SplitSpec> {
    if let Some(file) = text.strip_prefix("custom:") {
        let json = fs::read_to_string(file).with_context(|| format!("reading split {file}"))?;
        return Ok(SplitSpec::from_json(&json)?);
    }
    let preset: SplitPreset = text.parse().map_err(|e: faultbench::Error| usage(e.to_string()))?;
    Ok(preset.split(mask_files(gt_dir)?.len())?)
}

fn dir_name(p: &Path) -> String {
    p.canonicalize()
        .ok()
        .and_then(|c| c.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| p.display().to_string())
}

fn emit(reports: &[BenchReport], format: ReportFormat, out: Option<&Path>) -> Result<()> {
    let bytes = emit_report(reports, format)?;
    match out {
        Some(path) => write_file(path, &bytes),
        None => Ok(std::io::stdout().write_all(&bytes)?),
    }
}

fn eval(a: &EvalArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse().map_err(|e: faultbench::Error| usage(e.to_string()))?;
    let split = a.split.as_deref().map(|s| resolve_split(s, &a.gt)).transpose()?;
    let split_name = split.as_ref().map(|s| s.name.clone());
    let opts = EvalOptions {
        standardize_gt: !a.no_standardize,
        standardize_pred: !a.no_standardize,
        threshold: a.threshold,
        split,
    };
    let run = evaluate_run(&a.pred, &a.gt, &opts)
        .with_context(|| format!("evaluating {} against {}", a.pred.display(), a.gt.display()))?;
    for stem in &run.unmatched_pred {
        eprintln!("note: prediction {stem} has no label");
    }
    for stem in &run.unmatched_gt {
        eprintln!("note: label {stem} has no prediction");
    }
    for f in &run.failures {
        eprintln!("warning: {}: {}", f.section_id, f.error);
    }
    let agg_opts = AggregateOptions {
        degenerate: if a.penalize_degenerate { DegeneratePolicy::Penalize } else { DegeneratePolicy::Exclude },
    };
    let aggregates = aggregate_with(&run.records, &agg_opts)?;
    let report = BenchReport {
        config_name: a.name.clone().unwrap_or_else(|| dir_name(&a.pred)),
        test_set: a.test_set.clone().or(split_name).unwrap_or_else(|| dir_name(&a.gt)),
        rows: run.records,
        aggregates,
        rank: Rank::Unranked,
    };
    emit(&[report], format, a.out.as_deref())
}

fn report(a: &ReportArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse().map_err(|e: faultbench::Error| usage(e.to_string()))?;
    let mut reports: Vec<BenchReport> = Vec::new();
    for path in &a.input {
        let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let mut batch: Vec<BenchReport> =
            serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))?;
        reports.append(&mut batch);
    }
    let sets: BTreeSet<String> = reports.iter().map(|r| r.test_set.clone()).collect();
    for set in &sets {
        if reports.iter().filter(|r| &r.test_set == set).count() >= 2 {
            rank_configs(&mut reports, set)?;
        }
    }
    emit(&reports, format, a.out.as_deref())
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<()> {
    let defaults = FaultlabDefaults::load();
    match a.experiment {
        Experiment::Sparsity => {
            let mut cfg = defaults.sparsity;
            cfg.seed = seed;
            if let Some(t) = a.trials {
                cfg.trials = t;
            }
            let r = cfg.run()?;
            let mut csv = String::from("trial,arm,fault_pixels,dice,jaccard,bcd,modified_hausdorff\n");
            for row in &r.rows {
                let arm = match row.arm {
                    Arm::Few => "few",
                    Arm::Many => "many",
                };
                let _ = writeln!(
                    csv,
                    "{},{arm},{},{},{},{},{}",
                    row.trial, row.fault_pixels, row.dice, row.jaccard, row.bcd, row.modified_hausdorff
                );
            }
            write_file(&a.out.join("sparsity.csv"), csv.as_bytes())?;
            if cfg.trials > 0 {
                for (arm, spec, tag) in [(Arm::Few, &cfg.few, "few"), (Arm::Many, &cfg.many, "many")] {
                    let (clean, noisy) = sparsity_masks(spec, arm, cfg.noise_pixels, cfg.seed)?;
                    write_mask(&clean, &a.out.join(format!("{tag}_clean.png")))?;
                    write_mask(&noisy, &a.out.join(format!("{tag}_noisy.png")))?;
                }
            }
            println!("arm,mean_dice,mean_bcd,mean_modified_hausdorff");
            println!("few,{},{},{}", r.few.dice, r.few.bcd, r.few.modified_hausdorff);
            println!("many,{},{},{}", r.many.dice, r.many.bcd, r.many.modified_hausdorff);
        }
        Experiment::Contradiction => {
            let mut cfg = defaults.contradiction;
            cfg.seed = seed;
            if let Some(b) = a.budget {
                cfg.budget = b;
            }
            let pair = cfg.run()?;
            write_mask(&pair.gt, &a.out.join("gt.png"))?;
            write_mask(&pair.mask_b, &a.out.join("mask_b.png"))?;
            write_mask(&pair.mask_c, &a.out.join("mask_c.png"))?;
            let summary = serde_json::json!({
                "metrics_b": pair.metrics_b,
                "metrics_c": pair.metrics_c,
                "recipe_b": pair.recipe_b,
                "recipe_c": pair.recipe_c,
            });
            let text = serde_json::to_string_pretty(&summary)?;
            write_file(&a.out.join("contradiction.json"), text.as_bytes())?;
            println!("{text}");
        }
    }
    Ok(())
}

fn stats(a: &StatsArgs) -> Result<()> {
    let v = read_volume(&a.volume)?;
    let s = volume_stats(&v);
    let (i, x, n) = v.dims();
    println!("dims {i}x{x}x{n}");
    println!("min {}", s.min);
    println!("max {}", s.max);
    println!("mean {}", s.mean);
    println!("std {}", s.std);
    Ok(())
}
