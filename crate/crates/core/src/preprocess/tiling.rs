use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::section::{Section, SectionRef};
use crate::error::{Error, Result};

/// What to do when the window does not tile a section exactly.
///
/// `Reflect` and `ZeroPad` both add a final window per axis that ends on the
/// section border, so every pixel is covered without synthetic data. They
/// only differ when the window is larger than the section along an axis: the
/// patch is then filled by mirroring (without repeating the edge sample) or
/// with zeros. `DropPartial` keeps only windows on the stride grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadPolicy {
    #[default]
    Reflect,
    ZeroPad,
    DropPartial,
}

impl std::str::FromStr for PadPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "reflect" => Ok(PadPolicy::Reflect),
            "zero_pad" | "zero" => Ok(PadPolicy::ZeroPad),
            "drop_partial" | "drop" => Ok(PadPolicy::DropPartial),
            other => Err(Error::InvalidTiling(format!("unknown pad policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSpec {
    pub window_h: usize,
    pub window_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
    #[serde(default)]
    pub pad_policy: PadPolicy,
}

impl TilingSpec {
    pub fn square(window: usize, stride: usize, pad_policy: PadPolicy) -> Self {
        Self {
            window_h: window,
            window_w: window,
            stride_h: stride,
            stride_w: stride,
            pad_policy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (axis, window, stride) in [("row", self.window_h, self.stride_h), ("col", self.window_w, self.stride_w)] {
            if stride == 0 || stride > window {
                return Err(Error::InvalidTiling(format!(
                    "{axis} stride {stride} must satisfy 1 <= stride <= window ({window})"
                )));
            }
        }
        Ok(())
    }

    /// Patch origins along one axis of length `len`.
    fn origins(&self, len: usize, window: usize, stride: usize) -> Option<Vec<usize>> {
        if window > len {
            return match self.pad_policy {
                PadPolicy::DropPartial => None,
                _ => Some(vec![0]),
            };
        }
        let mut origins: Vec<usize> = (0..=len - window).step_by(stride).collect();
        let last = *origins.last().expect("window <= len gives origin 0");
        if self.pad_policy != PadPolicy::DropPartial && last + window < len {
            origins.push(len - window);
        }
        Some(origins)
    }
}

/// Position and size of a patch within its source section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGeometry {
    pub origin_row: usize,
    pub origin_col: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub values: Array2<f32>,
    pub origin_row: usize,
    pub origin_col: usize,
    pub section_ref: Option<SectionRef>,
}

impl Patch {
    pub fn geometry(&self) -> PatchGeometry {
        let (height, width) = self.values.dim();
        PatchGeometry {
            origin_row: self.origin_row,
            origin_col: self.origin_col,
            height,
            width,
        }
    }
}

fn reflect(i: usize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len - 1);
    let m = i % period;
    if m < len {
        m
    } else {
        period - m
    }
}

pub fn tile(section: &Section, spec: &TilingSpec) -> Result<Vec<Patch>> {
    tile_grid(section.values.view(), spec, Some(section.reference()))
}

/// Cuts `values` into windows, ordered row-major by origin.
pub fn tile_grid(
    values: ArrayView2<'_, f32>,
    spec: &TilingSpec,
    section_ref: Option<SectionRef>,
) -> Result<Vec<Patch>> {
    spec.validate()?;
    let (h, w) = values.dim();
    if h == 0 || w == 0 {
        return Err(Error::InvalidTiling("section is empty".into()));
    }
    let too_large = || Error::WindowLargerThanSection {
        window: (spec.window_h, spec.window_w),
        section: (h, w),
    };
    let rows = spec.origins(h, spec.window_h, spec.stride_h).ok_or_else(too_large)?;
    let cols = spec.origins(w, spec.window_w, spec.stride_w).ok_or_else(too_large)?;

    let mut patches = Vec::with_capacity(rows.len() * cols.len());
    for &r0 in &rows {
        for &c0 in &cols {
            let patch = Array2::from_shape_fn((spec.window_h, spec.window_w), |(dr, dc)| {
                let (r, c) = (r0 + dr, c0 + dc);
                if r < h && c < w {
                    values[[r, c]]
                } else {
                    match spec.pad_policy {
                        PadPolicy::ZeroPad => 0.0,
                        _ => values[[reflect(r, h), reflect(c, w)]],
                    }
                }
            });
            patches.push(Patch {
                values: patch,
                origin_row: r0,
                origin_col: c0,
                section_ref,
            });
        }
    }
    Ok(patches)
}

/// Averages overlapping patch predictions back onto a `dims` grid.
///
/// Patch pixels that fall outside the grid (padding) are ignored. Every grid
/// pixel must be covered at least once.
pub fn stitch(patches: &[(PatchGeometry, Array2<f64>)], dims: (usize, usize)) -> Result<Array2<f64>> {
    let (h, w) = dims;
    let mut sum = Array2::<f64>::zeros(dims);
    let mut hits = Array2::<u32>::zeros(dims);
    for (geom, values) in patches {
        if values.dim() != (geom.height, geom.width) {
            return Err(Error::DimensionMismatch {
                left: values.dim(),
                right: (geom.height, geom.width),
            });
        }
        let rows = geom.height.min(h.saturating_sub(geom.origin_row));
        let cols = geom.width.min(w.saturating_sub(geom.origin_col));
        for dr in 0..rows {
            for dc in 0..cols {
                let (r, c) = (geom.origin_row + dr, geom.origin_col + dc);
                sum[[r, c]] += values[[dr, dc]];
                hits[[r, c]] += 1;
            }
        }
    }
    if let Some(((row, col), _)) = hits.indexed_iter().find(|(_, &n)| n == 0) {
        return Err(Error::CoverageGap { row, col });
    }
    sum.zip_mut_with(&hits, |s, &n| *s /= n as f64);
    Ok(sum)
}
