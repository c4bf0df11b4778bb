//! IBM System/360 single-precision floats, as used by SEG-Y format code 1.
//!
//! Layout: 1 sign bit, 7-bit base-16 exponent biased by 64, 24-bit fraction
//! with the radix point to the left: `value = (-1)^s * 0.f * 16^(e - 64)`.

const FRACTION_MASK: u32 = 0x00ff_ffff;
const TWO_POW_24: f64 = 16_777_216.0;

/// Converts IBM bits to an `f64`. Exact: every IBM single fits in a double.
pub fn ibm_to_f64(bits: u32) -> f64 {
    let fraction = (bits & FRACTION_MASK) as f64;
    if fraction == 0.0 {
        return if bits & 0x8000_0000 != 0 { -0.0 } else { 0.0 };
    }
    let exponent = ((bits >> 24) & 0x7f) as i32 - 64;
    let magnitude = fraction / TWO_POW_24 * 16f64.powi(exponent);
    if bits & 0x8000_0000 != 0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Converts IBM bits to `f32`, rounding to nearest when the value falls
/// outside the single-precision range (overflow yields an infinity).
pub fn ibm_to_f32(bits: u32) -> f32 {
    ibm_to_f64(bits) as f32
}

/// Converts an `f32` to the nearest IBM single. Non-finite inputs saturate to
/// the largest IBM magnitude; NaN maps to zero.
pub fn f32_to_ibm(value: f32) -> u32 {
    if value.is_nan() || value == 0.0 {
        return if value.is_sign_negative() && !value.is_nan() {
            0x8000_0000
        } else {
            0
        };
    }
    let sign = if value.is_sign_negative() { 0x8000_0000 } else { 0 };
    if value.is_infinite() {
        return sign | 0x7fff_ffff;
    }
    let mut magnitude = (value as f64).abs();
    // Normalize into [1/16, 1) while tracking the base-16 exponent.
    let mut exponent: i32 = 0;
    while magnitude >= 1.0 {
        magnitude /= 16.0;
        exponent += 1;
    }
    while magnitude < 0.0625 {
        magnitude *= 16.0;
        exponent -= 1;
    }
    let mut fraction = (magnitude * TWO_POW_24).round() as u64;
    if fraction > FRACTION_MASK as u64 {
        fraction >>= 4;
        exponent += 1;
    }
    let biased = exponent + 64;
    if biased > 127 {
        return sign | 0x7fff_ffff;
    }
    if biased < 0 {
        // Below the smallest IBM exponent: denormalize the fraction.
        let shift = (-biased) as u32 * 4;
        if shift >= 24 {
            return sign;
        }
        return sign | ((fraction >> shift) as u32);
    }
    sign | ((biased as u32) << 24) | fraction as u32
}
