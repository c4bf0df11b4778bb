//! Reading and writing seismic volumes and fault masks.
//!
//! Supported formats: SEG-Y revision 0 (IBM or IEEE samples), raw binary
//! float32 dumps, NumPy `.npy` arrays and 8-bit PNG masks.

pub mod ibm;
mod mask_png;
mod npy;
mod raw;
mod segy;

pub use mask_png::{read_mask_png, write_mask_png};
pub use npy::{
    read_npy, read_npy_grid, read_npy_stack, write_npy_grid, write_npy_mask, write_npy_probability,
    write_npy_stack, write_npy_volume, NpyArray,
};
pub use raw::{read_raw_binary, write_raw_binary, Endianness};
pub use segy::{
    read_segy, read_segy_with, write_segy, FormatCode, SegyBinaryHeader, SegyLayout, TraceHeader,
    BINARY_HEADER_LEN, TEXT_HEADER_LEN, TRACE_HEADER_LEN,
};
