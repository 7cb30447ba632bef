//! Polar code with successive-cancellation decoding.
//!
//! Natural-order (no bit reversal) encoding `x = u * F^{(x)n}`, with
//! `F = [[1, 0], [1, 1]]`. The frozen set comes from Bhattacharyya-parameter
//! ranking at a design SNR. The decoder uses min-sum check-node updates.

use serde::{Deserialize, Serialize};

use super::SimError;

/// Which of the `n` input positions carry fixed zeros.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenSet {
    mask: Vec<bool>,
}

impl FrozenSet {
    pub fn from_mask(mask: Vec<bool>) -> Result<Self, SimError> {
        if !mask.len().is_power_of_two() {
            return Err(SimError::InvalidConfig(format!(
                "polar block length {} is not a power of two",
                mask.len()
            )));
        }
        Ok(FrozenSet { mask })
    }

    /// Freezes the `n - k` least reliable positions for a QPSK/AWGN channel
    /// at `design_snr_db` (Es/N0).
    pub fn bhattacharyya(n: usize, k: usize, design_snr_db: f64) -> Result<Self, SimError> {
        if !n.is_power_of_two() || k > n {
            return Err(SimError::InvalidConfig(format!("polar code ({n}, {k})")));
        }
        let ln_z = bhattacharyya_log_params(n, design_snr_db);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ln_z[a].total_cmp(&ln_z[b]).then(a.cmp(&b)));
        let mut mask = vec![true; n];
        for &i in &order[..k] {
            mask[i] = false;
        }
        Ok(FrozenSet { mask })
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn k(&self) -> usize {
        self.mask.iter().filter(|&&f| !f).count()
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.mask[i]).collect()
    }
}

/// `ln Z` for each synthetic channel. The most significant index bit picks
/// the first (outermost) polarization step, matching the decoder's split
/// into halves; each later step appends a less significant bit.
fn bhattacharyya_log_params(n: usize, design_snr_db: f64) -> Vec<f64> {
    let snr = 10f64.powf(design_snr_db / 10.0);
    // each coded bit sees amplitude 1/sqrt(2) in noise variance N0/2
    let mut ln_z = vec![-snr / 2.0];
    while ln_z.len() < n {
        ln_z = ln_z
            .iter()
            .flat_map(|&l| [l + (2.0 - l.exp()).ln(), 2.0 * l])
            .collect();
    }
    ln_z
}

fn transform_in_place(x: &mut [u8]) {
    let n = x.len();
    let mut half = 1;
    while half < n {
        for start in (0..n).step_by(2 * half) {
            for j in start..start + half {
                x[j] ^= x[j + half];
            }
        }
        half *= 2;
    }
}

/// Places `info` on the unfrozen positions and applies the polar transform.
pub fn polar_encode(info: &[u8], frozen: &FrozenSet) -> Result<Vec<u8>, SimError> {
    if info.len() != frozen.k() {
        return Err(SimError::SizeMismatch { expected: frozen.k(), got: info.len() });
    }
    let mut u = vec![0u8; frozen.n()];
    for (pos, &bit) in frozen.info_positions().iter().zip(info) {
        u[*pos] = bit & 1;
    }
    transform_in_place(&mut u);
    Ok(u)
}

fn check_node(a: f64, b: f64) -> f64 {
    a.signum() * b.signum() * a.abs().min(b.abs())
}

/// Decodes `llrs` (positive favours bit 0) and returns the information bits.
pub fn polar_decode_sc(llrs: &[f64], frozen: &FrozenSet) -> Result<Vec<u8>, SimError> {
    if llrs.len() != frozen.n() {
        return Err(SimError::SizeMismatch { expected: frozen.n(), got: llrs.len() });
    }
    let mut info = Vec::with_capacity(frozen.k());
    decode_node(llrs, &frozen.mask, &mut info);
    Ok(info)
}

/// Returns the re-encoded codeword of this sub-tree.
fn decode_node(llrs: &[f64], frozen: &[bool], info: &mut Vec<u8>) -> Vec<u8> {
    if llrs.len() == 1 {
        let bit = if frozen[0] { 0 } else { u8::from(llrs[0] < 0.0) };
        if !frozen[0] {
            info.push(bit);
        }
        return vec![bit];
    }
    let half = llrs.len() / 2;
    if frozen.iter().all(|&f| f) {
        return vec![0; llrs.len()];
    }
    let (a, b) = llrs.split_at(half);
    let upper: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| check_node(x, y)).collect();
    let v1 = decode_node(&upper, &frozen[..half], info);
    let lower: Vec<f64> = a
        .iter()
        .zip(b)
        .zip(&v1)
        .map(|((&x, &y), &bit)| y + if bit == 0 { x } else { -x })
        .collect();
    let v2 = decode_node(&lower, &frozen[half..], info);
    let mut out: Vec<u8> = v1.iter().zip(&v2).map(|(p, q)| p ^ q).collect();
    out.extend_from_slice(&v2);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Generator matrix F^{(x)n} row by row, as an independent encoder.
    fn encode_by_matrix(u: &[u8]) -> Vec<u8> {
        let n = u.len();
        let mut x = vec![0u8; n];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 1 {
                // row i of F^{(x)n} has a one at column j iff j's bits are a subset of i's
                for (j, xj) in x.iter_mut().enumerate() {
                    if j & !i == 0 {
                        *xj ^= 1;
                    }
                }
            }
        }
        x
    }

    #[test]
    fn transform_matches_generator_matrix() {
        let u: Vec<u8> = (0..32).map(|i| ((i * 5 + 3) % 7 % 2) as u8).collect();
        let mut x = u.clone();
        transform_in_place(&mut x);
        assert_eq!(x, encode_by_matrix(&u));
    }

    #[test]
    fn reliability_ordering_small_code() {
        // n = 4: synthetic channels rank u3 > u1/u2 > u0
        let f = FrozenSet::bhattacharyya(4, 1, 0.0).unwrap();
        assert_eq!(f.info_positions(), vec![3]);
        let f = FrozenSet::bhattacharyya(8, 4, 0.0).unwrap();
        assert!(f.info_positions().contains(&7));
        assert!(f.is_frozen(0));
    }

    #[test]
    fn default_code_shape() {
        let f = FrozenSet::bhattacharyya(256, 85, 0.0).unwrap();
        assert_eq!(f.n(), 256);
        assert_eq!(f.k(), 85);
        assert!(FrozenSet::bhattacharyya(100, 10, 0.0).is_err());
        assert!(FrozenSet::bhattacharyya(16, 17, 0.0).is_err());
    }

    #[test]
    fn noiseless_round_trip_256_85() {
        let f = FrozenSet::bhattacharyya(256, 85, 0.0).unwrap();
        let info: Vec<u8> = (0..85).map(|i| ((i * 13 + 1) % 3 % 2) as u8).collect();
        let x = polar_encode(&info, &f).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        assert_eq!(polar_decode_sc(&llr, &f).unwrap(), info);
    }

    #[test]
    fn all_frozen_code() {
        let f = FrozenSet::bhattacharyya(16, 0, 0.0).unwrap();
        assert_eq!(polar_encode(&[], &f).unwrap(), vec![0; 16]);
        assert!(polar_decode_sc(&[1.0; 16], &f).unwrap().is_empty());
    }

    #[test]
    fn size_errors() {
        let f = FrozenSet::bhattacharyya(16, 8, 0.0).unwrap();
        assert!(matches!(polar_encode(&[0; 7], &f), Err(SimError::SizeMismatch { expected: 8, got: 7 })));
        assert!(matches!(polar_decode_sc(&[0.0; 15], &f), Err(SimError::SizeMismatch { .. })));
    }

    #[test]
    fn corrects_a_few_weak_errors() {
        let f = FrozenSet::bhattacharyya(64, 21, 0.0).unwrap();
        let info: Vec<u8> = (0..21).map(|i| (i % 2) as u8).collect();
        let x = polar_encode(&info, &f).unwrap();
        let mut llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 3.0 } else { -3.0 }).collect();
        for i in [5, 17, 40] {
            llr[i] = -0.5 * llr[i].signum();
        }
        assert_eq!(polar_decode_sc(&llr, &f).unwrap(), info);
    }

    proptest! {
        #[test]
        fn encode_decode_identity(log_n in 1usize..9, seed in any::<u64>()) {
            let n = 1 << log_n;
            let k = (seed as usize) % (n + 1);
            let f = FrozenSet::bhattacharyya(n, k, 1.0).unwrap();
            let info: Vec<u8> = (0..k).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
            let x = polar_encode(&info, &f).unwrap();
            let mut u = vec![0u8; n];
            for (p, &b) in f.info_positions().iter().zip(&info) { u[*p] = b; }
            prop_assert_eq!(&x, &encode_by_matrix(&u));
            let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
            prop_assert_eq!(polar_decode_sc(&llr, &f).unwrap(), info);
        }
    }
}
