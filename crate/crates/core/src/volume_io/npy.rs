//! NumPy `.npy` interchange, backed by `npyz`.

use std::io;

use ndarray::{Array2, Array3, ArrayView2, ArrayView3};
use npyz::{DType, NpyFile, Order, TypeChar, WriterBuilder};

use crate::error::{Error, Result};
use crate::types::{FaultMask, ProbabilityMap, SeismicVolume, SourceFormat};

/// The three shapes of data the toolkit exchanges as `.npy`.
#[derive(Debug, Clone, PartialEq)]
pub enum NpyArray {
    /// 3D float array.
    Volume(SeismicVolume),
    /// 2D bool or uint8 array; nonzero marks a fault.
    Mask(FaultMask),
    /// 2D float array with values in `[0, 1]`.
    Probability(ProbabilityMap),
}

enum Payload {
    F32(Vec<f32>),
    F64(Vec<f64>),
    U8(Vec<u8>),
    Bool(Vec<bool>),
}

impl Payload {
    fn is_float(&self) -> bool {
        matches!(self, Payload::F32(_) | Payload::F64(_))
    }

    fn into_f64(self) -> Vec<f64> {
        match self {
            Payload::F32(v) => v.into_iter().map(f64::from).collect(),
            Payload::F64(v) => v,
            Payload::U8(v) => v.into_iter().map(f64::from).collect(),
            Payload::Bool(v) => v.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    fn into_f32(self) -> Vec<f32> {
        match self {
            Payload::F32(v) => v,
            other => other.into_f64().into_iter().map(|v| v as f32).collect(),
        }
    }
}

fn malformed(e: io::Error) -> Error {
    Error::Malformed {
        format: "NPY",
        message: e.to_string(),
    }
}

fn decode(bytes: &[u8]) -> Result<(Vec<usize>, Payload)> {
    let file = NpyFile::new(bytes).map_err(malformed)?;
    if file.order() == Order::Fortran && file.shape().len() > 1 {
        return Err(Error::FortranOrderUnsupported);
    }
    let shape: Vec<usize> = file.shape().iter().map(|&d| d as usize).collect();
    if !(2..=3).contains(&shape.len()) {
        return Err(Error::UnsupportedRank(shape.len()));
    }
    let dtype = file.dtype();
    let payload = match &dtype {
        DType::Plain(ts) => match (ts.type_char(), ts.size_field()) {
            (TypeChar::Float, 4) => Payload::F32(file.into_vec().map_err(malformed)?),
            (TypeChar::Float, 8) => Payload::F64(file.into_vec().map_err(malformed)?),
            (TypeChar::Uint, 1) => Payload::U8(file.into_vec().map_err(malformed)?),
            (TypeChar::Bool, 1) => Payload::Bool(file.into_vec().map_err(malformed)?),
            _ => return Err(Error::UnsupportedDtype(ts.to_string())),
        },
        other => return Err(Error::UnsupportedDtype(other.descr())),
    };
    Ok((shape, payload))
}

/// Reads a 2D or 3D C-ordered array of float32, float64, uint8 or bool.
pub fn read_npy(bytes: &[u8]) -> Result<NpyArray> {
    let (shape, payload) = decode(bytes)?;
    if shape.len() == 3 {
        if !payload.is_float() {
            return Err(Error::UnsupportedDtype(
                "3D arrays must be float32 or float64".into(),
            ));
        }
        let dims = (shape[0], shape[1], shape[2]);
        let array = Array3::from_shape_vec(dims, payload.into_f32()).map_err(|e| Error::Malformed {
            format: "NPY",
            message: e.to_string(),
        })?;
        return Ok(NpyArray::Volume(SeismicVolume::new(
            array,
            0,
            SourceFormat::NpyArray,
        )?));
    }
    let dims = (shape[0], shape[1]);
    match payload {
        Payload::U8(v) => Ok(NpyArray::Mask(FaultMask::new(
            Array2::from_shape_vec(dims, v.into_iter().map(|b| b != 0).collect()).expect("shape from header"),
        ))),
        Payload::Bool(v) => Ok(NpyArray::Mask(FaultMask::new(
            Array2::from_shape_vec(dims, v).expect("shape from header"),
        ))),
        float => Ok(NpyArray::Probability(ProbabilityMap::new(
            Array2::from_shape_vec(dims, float.into_f64()).expect("shape from header"),
        )?)),
    }
}

/// Reads any 2D array as `f64`, without range checks. Used for sections.
pub fn read_npy_grid(bytes: &[u8]) -> Result<Array2<f64>> {
    let (shape, payload) = decode(bytes)?;
    if shape.len() != 2 {
        return Err(Error::UnsupportedRank(shape.len()));
    }
    let values = payload.into_f64();
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample(pos));
    }
    Ok(Array2::from_shape_vec((shape[0], shape[1]), values).expect("shape from header"))
}

/// Reads a 3D stack (for example tiled patches) as `f32`.
pub fn read_npy_stack(bytes: &[u8]) -> Result<Array3<f32>> {
    let (shape, payload) = decode(bytes)?;
    if shape.len() != 3 {
        return Err(Error::UnsupportedRank(shape.len()));
    }
    Ok(Array3::from_shape_vec((shape[0], shape[1], shape[2]), payload.into_f32())
        .expect("shape from header"))
}

fn encode<T>(shape: &[usize], values: impl IntoIterator<Item = T>) -> Result<Vec<u8>>
where
    T: npyz::AutoSerialize,
{
    let shape: Vec<u64> = shape.iter().map(|&d| d as u64).collect();
    let mut out = Vec::new();
    {
        let mut writer = npyz::WriteOptions::<T>::new()
            .default_dtype()
            .shape(&shape)
            .writer(&mut out)
            .begin_nd()?;
        writer.extend(values)?;
        writer.finish()?;
    }
    Ok(out)
}

pub fn write_npy_volume(volume: &SeismicVolume) -> Result<Vec<u8>> {
    let (a, b, c) = volume.dims();
    encode(&[a, b, c], volume.as_slice().iter().copied())
}

/// Masks are written as `uint8` 0/1.
pub fn write_npy_mask(mask: &FaultMask) -> Result<Vec<u8>> {
    let (h, w) = mask.dims();
    encode(&[h, w], mask.grid().iter().map(|&v| v as u8))
}

pub fn write_npy_probability(map: &ProbabilityMap) -> Result<Vec<u8>> {
    write_npy_grid(map.values())
}

pub fn write_npy_grid(values: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
    let (h, w) = values.dim();
    encode(&[h, w], values.iter().copied())
}

pub fn write_npy_stack(values: ArrayView3<'_, f32>) -> Result<Vec<u8>> {
    let (n, h, w) = values.dim();
    encode(&[n, h, w], values.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn raw_npy(descr: &str, fortran: bool, shape: &str, data: &[u8]) -> Vec<u8> {
        let dict = format!(
            "{{'descr': '{descr}', 'fortran_order': {}, 'shape': {shape}, }}",
            if fortran { "True" } else { "False" }
        );
        let mut header = dict.into_bytes();
        while (10 + header.len() + 1) % 64 != 0 {
            header.push(b' ');
        }
        header.push(b'\n');
        let mut out = b"\x93NUMPY\x01\x00".to_vec();
        out.extend_from_slice(&(header.len() as u16).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn uint8_mask() {
        let bytes = raw_npy("|u1", false, "(2, 3)", &[0, 1, 0, 1, 1, 0]);
        let NpyArray::Mask(mask) = read_npy(&bytes).unwrap() else {
            panic!("expected mask")
        };
        assert_eq!(mask.points(), vec![(0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn version_two_header() {
        let dict = "{'descr': '|b1', 'fortran_order': False, 'shape': (1, 2), }";
        let mut header = dict.as_bytes().to_vec();
        while !(12 + header.len() + 1).is_multiple_of(64) {
            header.push(b' ');
        }
        header.push(b'\n');
        let mut bytes = b"\x93NUMPY\x02\x00".to_vec();
        bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&header);
        bytes.extend_from_slice(&[1, 0]);
        let NpyArray::Mask(mask) = read_npy(&bytes).unwrap() else {
            panic!("expected mask")
        };
        assert_eq!(mask.points(), vec![(0, 0)]);
    }

    #[test]
    fn float32_volume_dims() {
        let data: Vec<u8> = (0..12).flat_map(|i| (i as f32).to_le_bytes()).collect();
        let bytes = raw_npy("<f4", false, "(2, 3, 2)", &data);
        let NpyArray::Volume(v) = read_npy(&bytes).unwrap() else {
            panic!("expected volume")
        };
        assert_eq!(v.dims(), (2, 3, 2));
        assert_eq!(v.samples()[[1, 0, 1]], 7.0);
    }

    #[test]
    fn float_map_and_big_endian() {
        let data: Vec<u8> = [0.25f64, 1.0].iter().flat_map(|v| v.to_be_bytes()).collect();
        let bytes = raw_npy(">f8", false, "(1, 2)", &data);
        let NpyArray::Probability(p) = read_npy(&bytes).unwrap() else {
            panic!("expected probability map")
        };
        assert_eq!(p.values(), array![[0.25, 1.0]]);
    }

    #[test]
    fn rejected_inputs() {
        let four_d = raw_npy("<f4", false, "(1, 1, 1, 1)", &[0; 4]);
        assert!(matches!(read_npy(&four_d), Err(Error::UnsupportedRank(4))));
        let fortran = raw_npy("<f4", true, "(2, 2)", &[0; 16]);
        assert!(matches!(read_npy(&fortran), Err(Error::FortranOrderUnsupported)));
        let int32 = raw_npy("<i4", false, "(1, 1)", &[0; 4]);
        assert!(matches!(read_npy(&int32), Err(Error::UnsupportedDtype(_))));
        let mask3d = raw_npy("|u1", false, "(1, 1, 1)", &[0]);
        assert!(matches!(read_npy(&mask3d), Err(Error::UnsupportedDtype(_))));
        assert!(matches!(read_npy(b"not an npy"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn writers_round_trip() {
        let mask = FaultMask::from_points(3, 4, &[(0, 0), (2, 3)]);
        assert_eq!(read_npy(&write_npy_mask(&mask).unwrap()).unwrap(), NpyArray::Mask(mask));

        let map = ProbabilityMap::new(array![[0.1, 0.9], [0.5, 0.0]]).unwrap();
        assert_eq!(
            read_npy(&write_npy_probability(&map).unwrap()).unwrap(),
            NpyArray::Probability(map)
        );

        let stack = Array3::from_shape_fn((2, 2, 3), |(a, b, c)| (a * 6 + b * 3 + c) as f32 - 1.5);
        assert_eq!(read_npy_stack(&write_npy_stack(stack.view()).unwrap()).unwrap(), stack);
    }
}
