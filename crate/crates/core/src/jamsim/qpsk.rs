//! Gray-mapped QPSK with unit average symbol energy.
//!
//! Bit `2i` rides on the in-phase rail and bit `2i+1` on quadrature;
//! bit 0 maps to `+1/sqrt(2)`, bit 1 to `-1/sqrt(2)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::SimError;

fn level(bit: u8) -> f64 {
    if bit == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    }
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>, SimError> {
    if !bits.len().is_multiple_of(2) {
        return Err(SimError::OddLength(bits.len()));
    }
    Ok(bits.chunks_exact(2).map(|b| Complex64::new(level(b[0]), level(b[1]))).collect())
}

/// Per-bit log-likelihood ratios `ln P(0)/P(1)` for a complex AWGN channel
/// of total noise variance `noise_var`.
pub fn qpsk_llr(symbols: &[Complex64], noise_var: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::SQRT_2 / noise_var;
    symbols.iter().flat_map(|s| [scale * s.re, scale * s.im]).collect()
}

pub fn qpsk_hard_demod(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)])
        .collect()
}
