use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::types::SeismicVolume;

/// A volume-wide amplitude normalization.
pub trait Normalizer: Send + Sync {
    fn name(&self) -> &'static str;
    fn normalize(&self, volume: &SeismicVolume) -> Result<SeismicVolume>;
}

/// Maps the global amplitude range onto `[-1, 1]`.
pub struct MinMax;

/// Subtracts the global mean and divides by the population standard deviation.
pub struct ZScore;

impl Normalizer for MinMax {
    fn name(&self) -> &'static str {
        "minmax"
    }

    fn normalize(&self, volume: &SeismicVolume) -> Result<SeismicVolume> {
        normalize_minmax(volume)
    }
}

impl Normalizer for ZScore {
    fn name(&self) -> &'static str {
        "zscore"
    }

    fn normalize(&self, volume: &SeismicVolume) -> Result<SeismicVolume> {
        normalize_zscore(volume)
    }
}

/// The built-in normalizers, keyed by name.
pub fn normalizers() -> Registry<dyn Normalizer> {
    let mut reg: Registry<dyn Normalizer> = Registry::new("normalizer");
    reg.register("minmax", Arc::new(MinMax));
    reg.register("zscore", Arc::new(ZScore));
    reg
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

/// Global statistics over every voxel, accumulated in `f64`.
pub fn volume_stats(volume: &SeismicVolume) -> VolumeStats {
    let data = volume.as_slice();
    let n = data.len() as f64;
    let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &v in data {
        let v = v as f64;
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    let mean = sum / n;
    let var = data.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    VolumeStats {
        min,
        max,
        mean,
        std: var.sqrt(),
        count: data.len(),
    }
}

pub fn volume_std(volume: &SeismicVolume) -> f64 {
    volume_stats(volume).std
}

pub fn normalize_minmax(volume: &SeismicVolume) -> Result<SeismicVolume> {
    let stats = volume_stats(volume);
    let range = stats.max - stats.min;
    if range == 0.0 {
        return Err(Error::ConstantVolume);
    }
    let out = volume
        .samples()
        .mapv(|v| (2.0 * (v as f64 - stats.min) / range - 1.0) as f32);
    volume.with_samples(out)
}

pub fn normalize_zscore(volume: &SeismicVolume) -> Result<SeismicVolume> {
    let stats = volume_stats(volume);
    if stats.std == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let out = volume
        .samples()
        .mapv(|v| ((v as f64 - stats.mean) / stats.std) as f32);
    volume.with_samples(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SourceFormat;
    use ndarray::Array3;

    fn vol(values: &[f32]) -> SeismicVolume {
        let a = Array3::from_shape_vec((1, 1, values.len()), values.to_vec()).unwrap();
        SeismicVolume::new(a, 0, SourceFormat::NpyArray).unwrap()
    }

    #[test]
    fn minmax_endpoints_and_midpoint() {
        assert_eq!(normalize_minmax(&vol(&[0.0, 5.0, 10.0])).unwrap().as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(normalize_minmax(&vol(&[-3.0, 1.0])).unwrap().as_slice(), &[-1.0, 1.0]);
        assert!(matches!(normalize_minmax(&vol(&[2.0, 2.0])), Err(Error::ConstantVolume)));
    }

    #[test]
    fn zscore_hand_values() {
        let out = normalize_zscore(&vol(&[0.0, 0.0, 2.0, 2.0])).unwrap();
        assert_eq!(out.as_slice(), &[-1.0, -1.0, 1.0, 1.0]);
        assert!(matches!(normalize_zscore(&vol(&[3.0; 4])), Err(Error::ZeroVariance)));
    }

    #[test]
    fn zscore_fixed_point_unchanged() {
        let v = vol(&[-1.0, -1.0, 1.0, 1.0]);
        let out = normalize_zscore(&v).unwrap();
        for (a, b) in v.as_slice().iter().zip(out.as_slice()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn std_hand_values() {
        assert_eq!(volume_std(&vol(&[4.0; 3])), 0.0);
        assert_eq!(volume_std(&vol(&[0.0, 0.0, 2.0, 2.0])), 1.0);
        assert_eq!(volume_std(&vol(&[-1.0, 1.0])), 1.0);
    }

    #[test]
    fn registry_dispatch() {
        let reg = normalizers();
        assert_eq!(reg.names(), vec!["minmax", "zscore"]);
        let out = reg.get("minmax").unwrap().normalize(&vol(&[0.0, 10.0])).unwrap();
        assert_eq!(out.as_slice(), &[-1.0, 1.0]);
        assert!(reg.get("robust").is_err());
    }
}
