use std::io::Cursor;

use ndarray::Array2;
use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::types::FaultMask;

const FAULT_LEVEL: u8 = 127;

fn decoding(e: png::DecodingError) -> Error {
    Error::Malformed {
        format: "PNG",
        message: e.to_string(),
    }
}

fn encoding(e: png::EncodingError) -> Error {
    Error::Malformed {
        format: "PNG",
        message: e.to_string(),
    }
}

/// Unpacks a row of `bits`-deep samples to one value per pixel.
fn unpack_row(row: &[u8], bits: u8, width: usize) -> Vec<u16> {
    match bits {
        8 => row[..width].iter().map(|&v| v as u16).collect(),
        16 => row
            .chunks_exact(2)
            .take(width)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
        _ => {
            let per_byte = 8 / bits as usize;
            let mask = (1u16 << bits) - 1;
            (0..width)
                .map(|x| {
                    let byte = row[x / per_byte] as u16;
                    let shift = 8 - bits as usize * (x % per_byte + 1);
                    (byte >> shift) & mask
                })
                .collect()
        }
    }
}

/// Decodes a grayscale or paletted PNG; pixels brighter than 127 are faults.
///
/// Low bit depths are rescaled to 8 bits first. Palette entries are judged
/// by the mean of their RGB components.
pub fn read_mask_png(bytes: &[u8]) -> Result<FaultMask> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(decoding)?;
    let (color, depth) = reader.output_color_type();
    if !matches!(color, ColorType::Grayscale | ColorType::Indexed) {
        return Err(Error::UnsupportedColorType(format!("{color:?}")));
    }
    let palette_levels: Option<Vec<u8>> = match color {
        ColorType::Indexed => {
            let palette = reader.info().palette.as_ref().ok_or_else(|| Error::Malformed {
                format: "PNG",
                message: "indexed image without palette".into(),
            })?;
            Some(
                palette
                    .chunks_exact(3)
                    .map(|rgb| ((rgb[0] as u16 + rgb[1] as u16 + rgb[2] as u16) / 3) as u8)
                    .collect(),
            )
        }
        _ => None,
    };
    let bits = depth as u8;
    let size = reader.output_buffer_size().ok_or_else(|| Error::Malformed {
        format: "PNG",
        message: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(decoding)?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    let max_level = (1u32 << bits) - 1;

    let mut grid = Array2::from_elem((height, width), false);
    for (r, row) in buf.chunks(frame.line_size).take(height).enumerate() {
        for (c, value) in unpack_row(row, bits, width).into_iter().enumerate() {
            let level = match &palette_levels {
                Some(levels) => *levels.get(value as usize).ok_or_else(|| Error::Malformed {
                    format: "PNG",
                    message: format!("palette index {value} out of range"),
                })?,
                None => (value as u32 * 255 / max_level) as u8,
            };
            grid[[r, c]] = level > FAULT_LEVEL;
        }
    }
    Ok(FaultMask::new(grid))
}

/// Encodes a mask as 8-bit grayscale, faults white (255) on black.
pub fn write_mask_png(mask: &FaultMask) -> Result<Vec<u8>> {
    let (h, w) = mask.dims();
    let width = u32::try_from(w).map_err(|_| Error::InvalidArgument("mask too wide".into()))?;
    let height = u32::try_from(h).map_err(|_| Error::InvalidArgument("mask too tall".into()))?;
    let data: Vec<u8> = mask.grid().iter().map(|&v| if v { 255 } else { 0 }).collect();
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(ColorType::Grayscale);
        encoder.set_depth(BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(encoding)?;
        writer.write_image_data(&data).map_err(encoding)?;
        writer.finish().map_err(encoding)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(width: u32, height: u32, color: ColorType, depth: BitDepth, palette: Option<Vec<u8>>, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, width, height);
            encoder.set_color(color);
            encoder.set_depth(depth);
            if let Some(p) = palette {
                encoder.set_palette(p);
            }
            let mut writer = encoder.write_header().unwrap();
            writer.write_image_data(data).unwrap();
        }
        out
    }

    #[test]
    fn all_black_is_empty() {
        let bytes = encode(4, 3, ColorType::Grayscale, BitDepth::Eight, None, &[0; 12]);
        let mask = read_mask_png(&bytes).unwrap();
        assert_eq!(mask.dims(), (3, 4));
        assert!(mask.is_empty());
    }

    #[test]
    fn threshold_is_strictly_above_127() {
        let bytes = encode(3, 1, ColorType::Grayscale, BitDepth::Eight, None, &[127, 128, 255]);
        assert_eq!(read_mask_png(&bytes).unwrap().points(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn write_then_read_is_identity() {
        let mask = FaultMask::from_points(5, 7, &[(0, 0), (4, 6), (2, 3)]);
        assert_eq!(read_mask_png(&write_mask_png(&mask).unwrap()).unwrap(), mask);
    }

    #[test]
    fn paletted_binary() {
        // Two-entry palette: black, white. 1-bit indices 0b1010_0000 -> 1,0,1,0.
        let bytes = encode(
            4,
            1,
            ColorType::Indexed,
            BitDepth::One,
            Some(vec![0, 0, 0, 255, 255, 255]),
            &[0b1010_0000],
        );
        assert_eq!(read_mask_png(&bytes).unwrap().points(), vec![(0, 0), (0, 2)]);
    }

    #[test]
    fn one_bit_grayscale() {
        let bytes = encode(3, 1, ColorType::Grayscale, BitDepth::One, None, &[0b0100_0000]);
        assert_eq!(read_mask_png(&bytes).unwrap().points(), vec![(0, 1)]);
    }

    #[test]
    fn rgba_is_rejected() {
        let bytes = encode(1, 1, ColorType::Rgba, BitDepth::Eight, None, &[255, 255, 255, 255]);
        assert!(matches!(read_mask_png(&bytes), Err(Error::UnsupportedColorType(_))));
    }
}
