//! Core data carriers shared by every module.

use ndarray::{Array2, Array3, ArrayView2, ArrayView3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceFormat {
    SegY,
    RawBinary,
    NpyArray,
}

/// A dense 3D amplitude grid indexed `(inline, crossline, sample)`.
///
/// Every dimension is at least 1 and every sample is finite; both are
/// checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SeismicVolume {
    samples: Array3<f32>,
    sample_interval_us: u32,
    source_format: SourceFormat,
}

impl SeismicVolume {
    pub fn new(
        samples: Array3<f32>,
        sample_interval_us: u32,
        source_format: SourceFormat,
    ) -> Result<Self> {
        let (ni, nx, ns) = samples.dim();
        if ni == 0 || nx == 0 || ns == 0 {
            return Err(Error::InvalidArgument(format!(
                "volume dimensions must be positive, got {ni}x{nx}x{ns}"
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(pos));
        }
        let samples = if samples.is_standard_layout() {
            samples
        } else {
            samples.as_standard_layout().into_owned()
        };
        Ok(Self {
            samples,
            sample_interval_us,
            source_format,
        })
    }

    pub fn samples(&self) -> ArrayView3<'_, f32> {
        self.samples.view()
    }

    /// Samples in inline-major order.
    pub fn as_slice(&self) -> &[f32] {
        self.samples
            .as_slice()
            .expect("volume is kept in standard layout")
    }

    pub fn into_samples(self) -> Array3<f32> {
        self.samples
    }

    pub fn inline_count(&self) -> usize {
        self.samples.dim().0
    }

    pub fn crossline_count(&self) -> usize {
        self.samples.dim().1
    }

    pub fn sample_count(&self) -> usize {
        self.samples.dim().2
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.samples.dim()
    }

    pub fn sample_interval_us(&self) -> u32 {
        self.sample_interval_us
    }

    pub fn source_format(&self) -> SourceFormat {
        self.source_format
    }

    /// Returns a volume with the same metadata and new samples.
    pub fn with_samples(&self, samples: Array3<f32>) -> Result<Self> {
        Self::new(samples, self.sample_interval_us, self.source_format)
    }

    /// Bitwise sample equality plus matching dimensions.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self
                .as_slice()
                .iter()
                .zip(other.as_slice())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A 2D binary grid of fault pixels, `height x width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FaultMask {
    grid: Array2<bool>,
}

impl FaultMask {
    pub fn new(grid: Array2<bool>) -> Self {
        Self { grid }
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            grid: Array2::from_elem((height, width), false),
        }
    }

    pub fn full(height: usize, width: usize) -> Self {
        Self {
            grid: Array2::from_elem((height, width), true),
        }
    }

    /// Builds a mask with the given `(row, col)` pixels set.
    ///
    /// Panics if a point lies outside the grid.
    pub fn from_points(height: usize, width: usize, points: &[(usize, usize)]) -> Self {
        let mut mask = Self::empty(height, width);
        for &(r, c) in points {
            mask.grid[[r, c]] = true;
        }
        mask
    }

    pub fn height(&self) -> usize {
        self.grid.nrows()
    }

    pub fn width(&self) -> usize {
        self.grid.ncols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grid.dim()
    }

    pub fn grid(&self) -> ArrayView2<'_, bool> {
        self.grid.view()
    }

    pub fn grid_mut(&mut self) -> &mut Array2<bool> {
        &mut self.grid
    }

    pub fn into_grid(self) -> Array2<bool> {
        self.grid
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.grid[[row, col]]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.grid[[row, col]] = value;
    }

    pub fn count(&self) -> usize {
        self.grid.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.grid.iter().any(|&v| v)
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.grid
            .indexed_iter()
            .filter(|(_, &v)| v)
            .map(|(idx, _)| idx)
            .collect()
    }

    /// `true` when every foreground pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &FaultMask) -> bool {
        self.dims() == other.dims() && self.grid.iter().zip(other.grid.iter()).all(|(&a, &b)| !a || b)
    }

    pub fn ensure_same_dims(&self, other: &FaultMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }
}

/// A 2D grid of fault likelihoods, each finite and within `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    values: Array2<f64>,
}

impl ProbabilityMap {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(((r, c), v)) = values
            .indexed_iter()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidProbability(format!("{v} at ({r}, {c})")));
        }
        Ok(Self { values })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(Array2::from_elem((height, width), value))
    }

    /// Converts a binary mask to a 0/1 map.
    pub fn from_mask(mask: &FaultMask) -> Self {
        Self {
            values: mask.grid().mapv(|v| if v { 1.0 } else { 0.0 }),
        }
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: dims,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn volume_rejects_empty_and_non_finite() {
        assert!(SeismicVolume::new(Array3::zeros((0, 1, 1)), 0, SourceFormat::NpyArray).is_err());
        let mut a = Array3::<f32>::zeros((1, 1, 2));
        a[[0, 0, 1]] = f32::NAN;
        assert!(matches!(
            SeismicVolume::new(a, 0, SourceFormat::NpyArray),
            Err(Error::NonFiniteSample(1))
        ));
    }

    #[test]
    fn probability_map_checks_range() {
        assert!(ProbabilityMap::new(array![[0.0, 1.0]]).is_ok());
        assert!(ProbabilityMap::new(array![[1.5]]).is_err());
        assert!(ProbabilityMap::new(array![[f64::NAN]]).is_err());
    }

    #[test]
    fn mask_points_and_subset() {
        let a = FaultMask::from_points(3, 3, &[(0, 0), (2, 1)]);
        let b = FaultMask::from_points(3, 3, &[(0, 0), (2, 1), (1, 1)]);
        assert_eq!(a.points(), vec![(0, 0), (2, 1)]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert_eq!(b.count(), 3);
    }
}
