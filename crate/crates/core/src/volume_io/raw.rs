use ndarray::Array3;

use crate::error::{Error, Result};
use crate::types::{SeismicVolume, SourceFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

/// Interprets `bytes` as float32 samples in inline-major order.
pub fn read_raw_binary(
    bytes: &[u8],
    dims: (usize, usize, usize),
    endianness: Endianness,
) -> Result<SeismicVolume> {
    let count = dims
        .0
        .checked_mul(dims.1)
        .and_then(|n| n.checked_mul(dims.2))
        .ok_or_else(|| Error::InvalidArgument(format!("dimensions {dims:?} overflow")))?;
    if count == 0 {
        return Err(Error::InvalidArgument(format!(
            "dimensions must be positive, got {dims:?}"
        )));
    }
    let expected = count * 4;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    let samples: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| {
            let raw = [c[0], c[1], c[2], c[3]];
            match endianness {
                Endianness::Little => f32::from_le_bytes(raw),
                Endianness::Big => f32::from_be_bytes(raw),
            }
        })
        .collect();
    let array = Array3::from_shape_vec(dims, samples).expect("length checked above");
    SeismicVolume::new(array, 0, SourceFormat::RawBinary)
}

pub fn write_raw_binary(volume: &SeismicVolume, endianness: Endianness) -> Vec<u8> {
    volume
        .as_slice()
        .iter()
        .flat_map(|v| match endianness {
            Endianness::Little => v.to_le_bytes(),
            Endianness::Big => v.to_be_bytes(),
        })
        .collect()
}
