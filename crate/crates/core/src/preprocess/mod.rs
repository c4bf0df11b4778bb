//! Amplitude normalization, section extraction, tiling and stitching.

mod normalize;
mod section;
mod tiling;

pub use normalize::{
    normalize_minmax, normalize_zscore, normalizers, volume_stats, volume_std, MinMax, Normalizer,
    VolumeStats, ZScore,
};
pub use section::{extract_section, restack, Section, SectionAxis, SectionRef};
pub use tiling::{stitch, tile, tile_grid, PadPolicy, Patch, PatchGeometry, TilingSpec};
