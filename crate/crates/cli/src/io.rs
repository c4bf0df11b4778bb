use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use faultbench::volume_io::{
    read_mask_png, read_npy, read_npy_grid, read_raw_binary, read_segy_with, write_mask_png, write_npy_mask,
    write_npy_volume, write_raw_binary, write_segy, Endianness, NpyArray, SegyLayout,
};
use faultbench::{FaultMask, ProbabilityMap, SeismicVolume};

use crate::{Endian, UsageError, VolumeInput};

pub fn extension(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

fn endianness(e: Endian) -> Endianness {
    match e {
        Endian::Little => Endianness::Little,
        Endian::Big => Endianness::Big,
    }
}

fn parse_dims(text: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| UsageError(format!("--dims expects I,X,S integers, got {text:?}")))?;
    match parts[..] {
        [i, x, s] => Ok((i, x, s)),
        _ => Err(UsageError(format!("--dims expects three values, got {text:?}")).into()),
    }
}

pub fn read_volume(input: &VolumeInput) -> Result<SeismicVolume> {
    let path = &input.input;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let volume = match extension(path).as_str() {
        "sgy" | "segy" => read_segy_with(
            &bytes,
            &SegyLayout {
                inline_byte: input.inline_byte,
                crossline_byte: input.crossline_byte,
            },
        )?,
        "npy" => match read_npy(&bytes)? {
            NpyArray::Volume(v) => v,
            _ => bail!("{} holds a 2D array, not a volume", path.display()),
        },
        "raw" | "bin" => {
            let dims = input
                .dims
                .as_deref()
                .ok_or_else(|| UsageError("raw input needs --dims I,X,S".into()))?;
            read_raw_binary(&bytes, parse_dims(dims)?, endianness(input.endian))?
        }
        other => return Err(UsageError(format!("unrecognized volume extension {other:?}")).into()),
    };
    Ok(volume)
}

pub fn write_volume(volume: &SeismicVolume, path: &Path, format_code: u16, endian: Endian) -> Result<()> {
    let bytes = match extension(path).as_str() {
        "sgy" | "segy" => write_segy(volume, format_code)?,
        "npy" => write_npy_volume(volume)?,
        "raw" | "bin" => write_raw_binary(volume, endianness(endian)),
        other => return Err(UsageError(format!("unrecognized output extension {other:?}")).into()),
    };
    write_file(path, &bytes)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// `.png` and `.npy` files in `dir`, keyed by file stem.
pub fn mask_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && matches!(extension(&path).as_str(), "png" | "npy") {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            out.insert(stem, path);
        }
    }
    Ok(out)
}

pub fn read_probability(path: &Path) -> Result<ProbabilityMap> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match extension(path).as_str() {
        "png" => ProbabilityMap::from_mask(&read_mask_png(&bytes)?),
        _ => ProbabilityMap::new(read_npy_grid(&bytes)?)?,
    })
}

pub fn write_mask(mask: &FaultMask, path: &Path) -> Result<()> {
    let bytes = match extension(path).as_str() {
        "npy" => write_npy_mask(mask)?,
        _ => write_mask_png(mask)?,
    };
    write_file(path, &bytes)
}
