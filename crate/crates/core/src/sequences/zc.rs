use std::f64::consts::PI;

use num_complex::Complex64;

use super::SequenceError;

/// Zadoff-Chu sequence `x[n] = exp(-j*pi*u*n*(n+1)/N)` for odd `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZcSequence {
    pub root: u32,
    pub length: u32,
    pub values: Vec<Complex64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gen_zadoff_chu(root: u32, length: u32) -> Result<ZcSequence, SequenceError> {
    let invalid = SequenceError::InvalidRoot { root, length };
    if length < 3 || length.is_multiple_of(2) || root == 0 || gcd(u64::from(root), u64::from(length)) != 1 {
        return Err(invalid);
    }
    let (u, n_len) = (u64::from(root), u64::from(length));
    // phase index kept exact modulo 2N before converting to an angle
    let values = (0..n_len)
        .map(|n| {
            let k = (u * (n * (n + 1) % (2 * n_len))) % (2 * n_len);
            Complex64::from_polar(1.0, -PI * k as f64 / n_len as f64)
        })
        .collect();
    Ok(ZcSequence { root, length, values })
}
