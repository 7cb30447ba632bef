//! Correlation primitives and the PSS detector.
//!
//! The detector metric at each (PSS id, lag) is the normalized correlation
//!
//! ```text
//! |sum_n r[lag+n] p[n]| / sqrt(127 * sum_n |r[lag+n]|^2)
//! ```
//!
//! which lies in [0, 1] and does not depend on the input scale. The
//! threshold is set empirically from pure-noise trials.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_pss, gen_sss, CellId, SequenceError, SYNC_SEQUENCE_LEN};
use crate::rng::{complex_gaussian, trial_rng};

const N: usize = SYNC_SEQUENCE_LEN;

fn pss_bank() -> &'static [[f64; N]; 3] {
    static BANK: OnceLock<[[f64; N]; 3]> = OnceLock::new();
    BANK.get_or_init(|| {
        let mut bank = [[0.0; N]; 3];
        for (id, row) in bank.iter_mut().enumerate() {
            let p = gen_pss(id as u8).expect("valid id");
            for (dst, &v) in row.iter_mut().zip(p.values()) {
                *dst = f64::from(v);
            }
        }
        bank
    })
}

/// Magnitude of the circular correlation `sum_n a[(n+lag)%N] * conj(b[n])`
/// at every lag, divided by the length. A peak at `lag` means `a` advanced by
/// `lag` samples lines up with `b`.
pub fn periodic_xcorr(a: &[Complex64], b: &[Complex64]) -> Result<Vec<f64>, SequenceError> {
    if a.len() != b.len() {
        return Err(SequenceError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    Ok((0..n)
        .map(|lag| {
            let c: Complex64 = (0..n).map(|i| a[(i + lag) % n] * b[i].conj()).sum();
            c.norm() / n as f64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PssCandidate {
    pub n_id_2: u8,
    pub lag: usize,
    pub metric: f64,
}

/// Normalized metric for every (id, lag); visits in id-major order.
fn for_each_metric(received: &[Complex64], mut visit: impl FnMut(u8, usize, f64)) {
    let lags = received.len() - N + 1;
    let mut energy: f64 = received[..N].iter().map(|s| s.norm_sqr()).sum();
    let mut energies = Vec::with_capacity(lags);
    for lag in 0..lags {
        energies.push(energy);
        if lag + N < received.len() {
            energy += received[lag + N].norm_sqr() - received[lag].norm_sqr();
        }
    }
    for (id, template) in pss_bank().iter().enumerate() {
        for (lag, &e) in energies.iter().enumerate() {
            let window = &received[lag..lag + N];
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &p) in window.iter().zip(template) {
                acc += s * p;
            }
            let metric = if e > 0.0 { acc.norm() / (N as f64 * e.max(0.0)).sqrt() } else { 0.0 };
            visit(id as u8, lag, metric.min(1.0));
        }
    }
}

/// Every (PSS id, lag) whose metric exceeds `fa_threshold`, strongest first.
pub fn detect_pss(received: &[Complex64], fa_threshold: f64) -> Result<Vec<PssCandidate>, SequenceError> {
    if received.len() < N {
        return Err(SequenceError::TooShort(received.len(), N));
    }
    if !fa_threshold.is_finite() {
        return Err(SequenceError::InvalidDetector(format!("threshold {fa_threshold}")));
    }
    let mut out = Vec::new();
    for_each_metric(received, |n_id_2, lag, metric| {
        if metric > fa_threshold {
            out.push(PssCandidate { n_id_2, lag, metric });
        }
    });
    out.sort_by(|a, b| {
        b.metric
            .total_cmp(&a.metric)
            .then(a.n_id_2.cmp(&b.n_id_2))
            .then(a.lag.cmp(&b.lag))
    });
    Ok(out)
}

fn max_metric(received: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for_each_metric(received, |_, _, m| best = best.max(m));
    best
}

/// Threshold giving a target false-alarm rate on pure noise, with the
/// settings it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorCalibration {
    pub window_len: usize,
    pub false_alarm: f64,
    pub threshold: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Sets the threshold so that a `window_len`-sample pure-noise input
/// produces any candidate with probability `false_alarm`.
pub fn calibrate_pss_threshold(
    window_len: usize,
    false_alarm: f64,
    trials: usize,
    seed: u64,
) -> Result<DetectorCalibration, SequenceError> {
    if window_len < N {
        return Err(SequenceError::TooShort(window_len, N));
    }
    if !(false_alarm > 0.0 && false_alarm < 1.0) || trials == 0 {
        return Err(SequenceError::InvalidDetector(format!(
            "false_alarm {false_alarm} with {trials} trials"
        )));
    }
    let mut maxima: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let noise: Vec<Complex64> = (0..window_len).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            max_metric(&noise)
        })
        .collect();
    maxima.sort_by(f64::total_cmp);
    // the fraction of maxima strictly above maxima[k] is about false_alarm
    let k = (((1.0 - false_alarm) * trials as f64).ceil() as usize).clamp(1, trials) - 1;
    Ok(DetectorCalibration { window_len, false_alarm, threshold: maxima[k], trials, seed })
}

/// Most likely `n_id_1` for a 127-sample SSS observation at known timing and
/// known `n_id_2`, with its normalized correlation.
pub fn identify_sss(observed: &[Complex64], n_id_2: u8) -> Result<(u16, f64), SequenceError> {
    if observed.len() != N {
        return Err(SequenceError::LengthMismatch(observed.len(), N));
    }
    let energy: f64 = observed.iter().map(|s| s.norm_sqr()).sum();
    let mut best = (0u16, f64::NEG_INFINITY);
    for n_id_1 in 0..=335u16 {
        let sss = gen_sss(CellId::new(n_id_1, n_id_2)?)?;
        let acc: Complex64 = observed.iter().zip(sss.values()).map(|(s, &v)| s * f64::from(v)).sum();
        let m = acc.norm();
        if m > best.1 {
            best = (n_id_1, m);
        }
    }
    let norm = if energy > 0.0 { best.1 / (N as f64 * energy).sqrt() } else { 0.0 };
    Ok((best.0, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::PSS_SHIFT_PER_ID;

    fn pss(id: u8) -> Vec<Complex64> {
        gen_pss(id).unwrap().to_complex()
    }

    #[test]
    fn xcorr_basics() {
        let s = pss(0);
        assert!((periodic_xcorr(&s, &s).unwrap()[0] - 1.0).abs() < 1e-12);
        let zeros = vec![Complex64::new(0.0, 0.0); 127];
        assert!(periodic_xcorr(&s, &zeros).unwrap().iter().all(|&c| c == 0.0));
        assert!(matches!(periodic_xcorr(&s, &s[..10]), Err(SequenceError::LengthMismatch(127, 10))));
    }

    #[test]
    fn xcorr_peak_at_construction_shift() {
        let c = periodic_xcorr(&pss(0), &pss(1)).unwrap();
        let peak = (0..127).max_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
        assert_eq!(peak, PSS_SHIFT_PER_ID);
        assert!((c[peak] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clean_pss_found_at_lag() {
        let mut rx = vec![Complex64::new(0.0, 0.0); 300];
        for (i, s) in pss(2).into_iter().enumerate() {
            rx[40 + i] = s;
        }
        let c = detect_pss(&rx, 0.5).unwrap();
        assert_eq!((c[0].n_id_2, c[0].lag), (2, 40));
        assert!((c[0].metric - 1.0).abs() < 1e-12);
        assert!(matches!(detect_pss(&rx[..100], 0.5), Err(SequenceError::TooShort(100, 127))));
    }

    #[test]
    fn metric_is_scale_invariant() {
        let mut rng = trial_rng(5, 0);
        let rx: Vec<Complex64> = (0..256).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let scaled: Vec<Complex64> = rx.iter().map(|s| s * Complex64::new(0.0, 37.5)).collect();
        let a = detect_pss(&rx, 0.0).unwrap();
        let b = detect_pss(&scaled, 0.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.n_id_2, x.lag), (y.n_id_2, y.lag));
            assert!((x.metric - y.metric).abs() < 1e-9);
        }
    }

    #[test]
    fn false_alarm_calibration_holds_on_fresh_noise() {
        let cal = calibrate_pss_threshold(256, 0.01, 10_000, 11).unwrap();
        assert!(cal.threshold > 0.1 && cal.threshold < 0.6, "{}", cal.threshold);
        let hits: usize = (0..10_000u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(99, t);
                let noise: Vec<Complex64> = (0..256).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                usize::from(!detect_pss(&noise, cal.threshold).unwrap().is_empty())
            })
            .sum();
        let rate = hits as f64 / 10_000.0;
        // binomial sd at 1% over 1e4 trials is 0.001; allow calibration error too
        assert!((rate - 0.01).abs() < 0.004, "false alarm rate {rate}");
    }

    #[test]
    fn two_pss_stronger_first() {
        let cal = calibrate_pss_threshold(400, 0.01, 2_000, 3).unwrap();
        let mut rng = trial_rng(8, 0);
        let mut rx: Vec<Complex64> = (0..400).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let strong = 10f64.powf(6.0 / 20.0);
        for (i, s) in pss(0).into_iter().enumerate() {
            rx[30 + i] += s * strong;
        }
        for (i, s) in pss(1).into_iter().enumerate() {
            rx[250 + i] += s;
        }
        let c = detect_pss(&rx, cal.threshold).unwrap();
        assert!(c.len() >= 2);
        assert_eq!((c[0].n_id_2, c[0].lag), (0, 30));
        assert_eq!((c[1].n_id_2, c[1].lag), (1, 250));
    }

    #[test]
    fn sss_identification() {
        let id = CellId::new(211, 1).unwrap();
        let sss = gen_sss(id).unwrap().to_complex();
        let (n1, m) = identify_sss(&sss, 1).unwrap();
        assert_eq!(n1, 211);
        assert!((m - 1.0).abs() < 1e-12);
        assert!(identify_sss(&sss[..5], 1).is_err());
    }

    #[test]
    fn calibration_rejects_bad_settings() {
        assert!(calibrate_pss_threshold(100, 0.01, 10, 1).is_err());
        assert!(calibrate_pss_threshold(256, 0.0, 10, 1).is_err());
        assert!(calibrate_pss_threshold(256, 0.01, 0, 1).is_err());
    }
}
