//! SEG-Y revision 0 reader and writer.
//!
//! File layout: a 3200-byte textual header, a 400-byte binary header, then
//! one 240-byte header per trace followed by its samples. Every multi-byte
//! field is big-endian.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array3;

use super::ibm;
use crate::error::{Error, Result};
use crate::types::{SeismicVolume, SourceFormat};

pub const TEXT_HEADER_LEN: usize = 3200;
pub const BINARY_HEADER_LEN: usize = 400;
pub const TRACE_HEADER_LEN: usize = 240;

// Zero-based offsets inside the binary header.
const BIN_SAMPLE_INTERVAL: usize = 16;
const BIN_SAMPLES_PER_TRACE: usize = 20;
const BIN_FORMAT_CODE: usize = 24;

// Zero-based offsets inside a trace header.
const TRACE_SAMPLE_COUNT: usize = 114;
const TRACE_SAMPLE_INTERVAL: usize = 116;

/// Sample encoding, from the binary header's format code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatCode {
    IbmFloat32 = 1,
    IeeeFloat32 = 5,
}

impl FormatCode {
    pub fn from_code(code: u16) -> Result<Self> {
        match code {
            1 => Ok(FormatCode::IbmFloat32),
            5 => Ok(FormatCode::IeeeFloat32),
            other => Err(Error::UnsupportedFormatCode(other)),
        }
    }

    pub fn code(self) -> u16 {
        self as u16
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegyBinaryHeader {
    pub sample_interval_us: u16,
    pub samples_per_trace: u16,
    pub format_code: FormatCode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceHeader {
    pub inline_no: i32,
    pub crossline_no: i32,
    pub trace_sample_count: u16,
}

/// Where inline and crossline numbers live in each trace header.
///
/// Positions are 1-based byte numbers, as printed in the SEG-Y standard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegyLayout {
    pub inline_byte: usize,
    pub crossline_byte: usize,
}

impl Default for SegyLayout {
    fn default() -> Self {
        Self {
            inline_byte: 189,
            crossline_byte: 193,
        }
    }
}

impl SegyLayout {
    fn validate(&self) -> Result<()> {
        for (name, byte) in [("inline", self.inline_byte), ("crossline", self.crossline_byte)] {
            if byte == 0 || byte + 3 > TRACE_HEADER_LEN {
                return Err(Error::InvalidArgument(format!(
                    "{name} header byte {byte} outside 1..={}",
                    TRACE_HEADER_LEN - 3
                )));
            }
        }
        Ok(())
    }
}

fn be_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([bytes[at], bytes[at + 1]])
}

fn be_i32(bytes: &[u8], at: usize) -> i32 {
    i32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn parse_binary_header(bytes: &[u8]) -> Result<SegyBinaryHeader> {
    let format_code = FormatCode::from_code(be_u16(bytes, BIN_FORMAT_CODE))?;
    let samples_per_trace = be_u16(bytes, BIN_SAMPLES_PER_TRACE);
    if samples_per_trace == 0 {
        return Err(Error::Malformed {
            format: "SEG-Y",
            message: "binary header declares zero samples per trace".into(),
        });
    }
    Ok(SegyBinaryHeader {
        sample_interval_us: be_u16(bytes, BIN_SAMPLE_INTERVAL),
        samples_per_trace,
        format_code,
    })
}

fn parse_trace_header(bytes: &[u8], layout: &SegyLayout) -> TraceHeader {
    TraceHeader {
        inline_no: be_i32(bytes, layout.inline_byte - 1),
        crossline_no: be_i32(bytes, layout.crossline_byte - 1),
        trace_sample_count: be_u16(bytes, TRACE_SAMPLE_COUNT),
    }
}

/// Reads a SEG-Y file using the default header layout.
pub fn read_segy(bytes: &[u8]) -> Result<SeismicVolume> {
    read_segy_with(bytes, &SegyLayout::default())
}

/// Reads a SEG-Y file, taking inline/crossline numbers from `layout`.
///
/// Traces are placed on a dense grid whose axes are the distinct inline and
/// crossline numbers in ascending order. Holes or duplicate positions are
/// rejected.
pub fn read_segy_with(bytes: &[u8], layout: &SegyLayout) -> Result<SeismicVolume> {
    layout.validate()?;
    let preamble = TEXT_HEADER_LEN + BINARY_HEADER_LEN;
    if bytes.len() < preamble {
        return Err(Error::TruncatedFile(format!(
            "{} bytes is shorter than the {preamble}-byte file header",
            bytes.len()
        )));
    }
    let header = parse_binary_header(&bytes[TEXT_HEADER_LEN..preamble])?;
    let ns = header.samples_per_trace as usize;
    let trace_len = TRACE_HEADER_LEN + 4 * ns;

    let mut traces: Vec<(TraceHeader, &[u8])> = Vec::new();
    let mut offset = preamble;
    while offset < bytes.len() {
        let remaining = bytes.len() - offset;
        if remaining < trace_len {
            return Err(Error::TruncatedFile(format!(
                "trace {} needs {trace_len} bytes, only {remaining} remain",
                traces.len()
            )));
        }
        let th = parse_trace_header(&bytes[offset..offset + TRACE_HEADER_LEN], layout);
        if th.trace_sample_count != 0 && th.trace_sample_count as usize != ns {
            return Err(Error::IrregularGeometry(format!(
                "trace {} has {} samples, binary header says {ns}",
                traces.len(),
                th.trace_sample_count
            )));
        }
        traces.push((th, &bytes[offset + TRACE_HEADER_LEN..offset + trace_len]));
        offset += trace_len;
    }
    if traces.is_empty() {
        return Err(Error::IrregularGeometry("file contains no traces".into()));
    }

    let inlines: BTreeSet<i32> = traces.iter().map(|(h, _)| h.inline_no).collect();
    let crosslines: BTreeSet<i32> = traces.iter().map(|(h, _)| h.crossline_no).collect();
    let (ni, nx) = (inlines.len(), crosslines.len());
    if ni * nx != traces.len() {
        return Err(Error::IrregularGeometry(format!(
            "{} traces do not fill a {ni} x {nx} inline/crossline grid",
            traces.len()
        )));
    }
    let inline_pos: BTreeMap<i32, usize> = inlines.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let crossline_pos: BTreeMap<i32, usize> =
        crosslines.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut samples = Array3::<f32>::zeros((ni, nx, ns));
    let mut filled = vec![false; ni * nx];
    for (th, data) in &traces {
        let i = inline_pos[&th.inline_no];
        let x = crossline_pos[&th.crossline_no];
        if std::mem::replace(&mut filled[i * nx + x], true) {
            return Err(Error::IrregularGeometry(format!(
                "duplicate trace at inline {} crossline {}",
                th.inline_no, th.crossline_no
            )));
        }
        for (k, chunk) in data.chunks_exact(4).enumerate() {
            let raw = u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            let value = match header.format_code {
                FormatCode::IbmFloat32 => ibm::ibm_to_f32(raw),
                FormatCode::IeeeFloat32 => f32::from_bits(raw),
            };
            if !value.is_finite() {
                return Err(Error::NonFiniteSample((i * nx + x) * ns + k));
            }
            samples[[i, x, k]] = value;
        }
    }
    SeismicVolume::new(samples, header.sample_interval_us as u32, SourceFormat::SegY)
}

fn text_header() -> Vec<u8> {
    let mut text = Vec::with_capacity(TEXT_HEADER_LEN);
    for line in 1..=40 {
        let mut card = match line {
            1 => "C 1 SEG-Y WRITTEN BY FAULTBENCH".to_string(),
            2 => "C 2 INLINE BYTES 189-192 CROSSLINE BYTES 193-196".to_string(),
            40 => "C40 END TEXTUAL HEADER".to_string(),
            n => format!("C{n:>2}"),
        };
        card.truncate(80);
        text.extend_from_slice(format!("{card:<80}").as_bytes());
    }
    text
}

/// Serializes `volume` as SEG-Y rev 0 with inline and crossline numbers
/// `1..=n` at the default header positions.
pub fn write_segy(volume: &SeismicVolume, format_code: u16) -> Result<Vec<u8>> {
    let format = FormatCode::from_code(format_code)?;
    let (ni, nx, ns) = volume.dims();
    let ns16 = u16::try_from(ns).map_err(|_| {
        Error::InvalidArgument(format!("{ns} samples per trace exceeds the SEG-Y limit of 65535"))
    })?;
    let interval = u16::try_from(volume.sample_interval_us()).map_err(|_| {
        Error::InvalidArgument(format!(
            "sample interval {} us exceeds the SEG-Y limit",
            volume.sample_interval_us()
        ))
    })?;
    let to_i32 = |n: usize| {
        i32::try_from(n).map_err(|_| Error::InvalidArgument(format!("line number {n} overflows")))
    };
    let layout = SegyLayout::default();

    let mut out =
        Vec::with_capacity(TEXT_HEADER_LEN + BINARY_HEADER_LEN + ni * nx * (TRACE_HEADER_LEN + 4 * ns));
    out.extend_from_slice(&text_header());

    let mut binary = [0u8; BINARY_HEADER_LEN];
    binary[BIN_SAMPLE_INTERVAL..BIN_SAMPLE_INTERVAL + 2].copy_from_slice(&interval.to_be_bytes());
    binary[BIN_SAMPLES_PER_TRACE..BIN_SAMPLES_PER_TRACE + 2].copy_from_slice(&ns16.to_be_bytes());
    binary[BIN_FORMAT_CODE..BIN_FORMAT_CODE + 2].copy_from_slice(&format.code().to_be_bytes());
    out.extend_from_slice(&binary);

    let samples = volume.samples();
    for i in 0..ni {
        for x in 0..nx {
            let mut th = [0u8; TRACE_HEADER_LEN];
            let il = layout.inline_byte - 1;
            let xl = layout.crossline_byte - 1;
            th[il..il + 4].copy_from_slice(&to_i32(i + 1)?.to_be_bytes());
            th[xl..xl + 4].copy_from_slice(&to_i32(x + 1)?.to_be_bytes());
            th[TRACE_SAMPLE_COUNT..TRACE_SAMPLE_COUNT + 2].copy_from_slice(&ns16.to_be_bytes());
            th[TRACE_SAMPLE_INTERVAL..TRACE_SAMPLE_INTERVAL + 2].copy_from_slice(&interval.to_be_bytes());
            out.extend_from_slice(&th);
            for k in 0..ns {
                let v = samples[[i, x, k]];
                let raw = match format {
                    FormatCode::IbmFloat32 => ibm::f32_to_ibm(v),
                    FormatCode::IeeeFloat32 => v.to_bits(),
                };
                out.extend_from_slice(&raw.to_be_bytes());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn volume(dims: (usize, usize, usize)) -> SeismicVolume {
        let samples = Array3::from_shape_fn(dims, |(i, x, k)| (i * 100 + x * 10 + k) as f32 - 7.5);
        SeismicVolume::new(samples, 4000, SourceFormat::SegY).unwrap()
    }

    #[test]
    fn ieee_round_trip_is_bitwise() {
        let v = volume((2, 2, 3));
        let back = read_segy(&write_segy(&v, 5).unwrap()).unwrap();
        assert!(v.bitwise_eq(&back));
        assert_eq!(back.sample_interval_us(), 4000);
    }

    #[test]
    fn ibm_round_trip_of_exact_values() {
        let v = volume((3, 1, 4));
        let back = read_segy(&write_segy(&v, 1).unwrap()).unwrap();
        assert!(v.bitwise_eq(&back));
    }

    #[test]
    fn single_sample_file_size() {
        let v = SeismicVolume::new(Array3::zeros((1, 1, 1)), 0, SourceFormat::SegY).unwrap();
        assert_eq!(write_segy(&v, 5).unwrap().len(), 3600 + 240 + 4);
    }

    #[test]
    fn unsupported_format_code() {
        let v = volume((1, 1, 1));
        assert!(matches!(write_segy(&v, 3), Err(Error::UnsupportedFormatCode(3))));
        let mut bytes = write_segy(&v, 5).unwrap();
        bytes[TEXT_HEADER_LEN + BIN_FORMAT_CODE + 1] = 8;
        assert!(matches!(read_segy(&bytes), Err(Error::UnsupportedFormatCode(8))));
    }

    #[test]
    fn truncated_trace() {
        let bytes = write_segy(&volume((2, 2, 3)), 5).unwrap();
        let cut = &bytes[..bytes.len() - 2];
        assert!(matches!(read_segy(cut), Err(Error::TruncatedFile(_))));
        assert!(matches!(read_segy(&bytes[..100]), Err(Error::TruncatedFile(_))));
    }

    #[test]
    fn hole_in_grid_is_irregular() {
        let v = volume((2, 2, 3));
        let bytes = write_segy(&v, 5).unwrap();
        // Drop the last trace: 3 traces cannot fill 2 x 2.
        let trace_len = TRACE_HEADER_LEN + 12;
        let cut = &bytes[..bytes.len() - trace_len];
        assert!(matches!(read_segy(cut), Err(Error::IrregularGeometry(_))));
    }

    #[test]
    fn duplicate_trace_is_irregular() {
        let v = volume((2, 2, 3));
        let mut bytes = write_segy(&v, 5).unwrap();
        let trace_len = TRACE_HEADER_LEN + 12;
        // Renumber trace 1 (inline 1, xline 2) to a second copy of (1, 1) and
        // trace 3 (inline 2, xline 2) to (2, 3) so the counts still multiply out.
        let t1 = TEXT_HEADER_LEN + BINARY_HEADER_LEN + trace_len;
        bytes[t1 + 192..t1 + 196].copy_from_slice(&1i32.to_be_bytes());
        let t3 = t1 + 2 * trace_len;
        bytes[t3 + 192..t3 + 196].copy_from_slice(&3i32.to_be_bytes());
        let err = read_segy(&bytes).unwrap_err();
        assert!(matches!(err, Error::IrregularGeometry(_)), "{err}");
    }

    #[test]
    fn axes_sorted_by_header_value() {
        let v = volume((2, 1, 2));
        let mut bytes = write_segy(&v, 5).unwrap();
        let trace_len = TRACE_HEADER_LEN + 8;
        let t0 = TEXT_HEADER_LEN + BINARY_HEADER_LEN;
        // Swap inline numbers: first trace becomes inline 2.
        bytes[t0 + 188..t0 + 192].copy_from_slice(&2i32.to_be_bytes());
        bytes[t0 + trace_len + 188..t0 + trace_len + 192].copy_from_slice(&1i32.to_be_bytes());
        let back = read_segy(&bytes).unwrap();
        assert_eq!(back.samples()[[0, 0, 0]], v.samples()[[1, 0, 0]]);
        assert_eq!(back.samples()[[1, 0, 1]], v.samples()[[0, 0, 1]]);
    }

    #[test]
    fn custom_header_layout() {
        let v = volume((2, 3, 2));
        let mut bytes = write_segy(&v, 5).unwrap();
        let trace_len = TRACE_HEADER_LEN + 8;
        // Copy inline/crossline numbers to bytes 9 and 21 and zero the defaults.
        for t in 0..6 {
            let base = TEXT_HEADER_LEN + BINARY_HEADER_LEN + t * trace_len;
            let il: [u8; 4] = bytes[base + 188..base + 192].try_into().unwrap();
            let xl: [u8; 4] = bytes[base + 192..base + 196].try_into().unwrap();
            bytes[base + 8..base + 12].copy_from_slice(&il);
            bytes[base + 20..base + 24].copy_from_slice(&xl);
            bytes[base + 188..base + 196].fill(0);
        }
        let layout = SegyLayout {
            inline_byte: 9,
            crossline_byte: 21,
        };
        assert!(read_segy_with(&bytes, &layout).unwrap().bitwise_eq(&v));
        assert!(matches!(read_segy(&bytes), Err(Error::IrregularGeometry(_))));
    }

    #[test]
    fn non_finite_ieee_sample_rejected() {
        let v = volume((1, 1, 2));
        let mut bytes = write_segy(&v, 5).unwrap();
        let at = TEXT_HEADER_LEN + BINARY_HEADER_LEN + TRACE_HEADER_LEN + 4;
        bytes[at..at + 4].copy_from_slice(&f32::NAN.to_bits().to_be_bytes());
        assert!(matches!(read_segy(&bytes), Err(Error::NonFiniteSample(1))));
    }
}
