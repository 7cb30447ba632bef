//! Monte-Carlo drivers: BER/BLER, PSS detection and SSS identification
//! under jamming, and DoS-threshold sweeps.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{
    awgn_and_jam, polar_decode_sc, polar_encode, qpsk_hard_demod, qpsk_llr, qpsk_modulate,
    FrozenSet, JammerKind, JammerSpec, SimError, SimResult,
};
use crate::grid::ChannelKind;
use crate::rng::{derive_seed, linear_to_db, trial_rng};
use crate::sequences::{
    calibrate_pss_threshold, detect_pss, gen_pss, gen_sss, identify_sss, CellId,
    DetectorCalibration, SYNC_SEQUENCE_LEN,
};

/// Failure rate at which a channel counts as denied.
pub const DOS_FAILURE_LEVEL: f64 = 0.9;

const BER_CHUNK_BITS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    #[default]
    Qpsk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    /// Uncoded blocks of `block_bits` bits.
    None { block_bits: usize },
    Polar {
        n: usize,
        k: usize,
        #[serde(default)]
        design_snr_db: f64,
    },
}

impl CodeSpec {
    /// Rate-1/3 control-channel surrogate.
    pub fn default_polar() -> Self {
        CodeSpec::Polar { n: 256, k: 85, design_snr_db: 0.0 }
    }

    fn info_bits(&self) -> usize {
        match *self {
            CodeSpec::None { block_bits } => block_bits,
            CodeSpec::Polar { k, .. } => k,
        }
    }
}

/// Link parameters. `snr_db` is the thermal SNR per QPSK symbol; the jammer
/// is supplied separately, so with the jammer off it is also the SINR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub snr_db: f64,
    #[serde(default)]
    pub modulation: Modulation,
    pub code: CodeSpec,
    pub trials: usize,
    pub seed: u64,
}

impl LinkConfig {
    pub fn control_channel(snr_db: f64, trials: usize, seed: u64) -> Self {
        LinkConfig { snr_db, modulation: Modulation::Qpsk, code: CodeSpec::default_polar(), trials, seed }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |why: String| Err(SimError::InvalidConfig(why));
        if !self.snr_db.is_finite() {
            return bad(format!("snr_db {} is not finite", self.snr_db));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        match self.code {
            CodeSpec::None { block_bits } if block_bits == 0 || block_bits % 2 != 0 => {
                bad(format!("uncoded block of {block_bits} bits; need a positive even count"))
            }
            CodeSpec::Polar { n, k, design_snr_db } => {
                if !n.is_power_of_two() || n < 2 {
                    bad(format!("polar n = {n} is not a power of two"))
                } else if k == 0 || k >= n {
                    bad(format!("polar k = {k} must lie in 1..{n}"))
                } else if !design_snr_db.is_finite() {
                    bad("design_snr_db is not finite".into())
                } else {
                    Ok(())
                }
            }
            CodeSpec::None { .. } => Ok(()),
        }
    }
}

/// Closed-form Gray QPSK bit error rate, `Q(sqrt(2 Eb/N0))`.
pub fn theoretical_qpsk_ber(ebn0_db: f64) -> f64 {
    0.5 * erfc(10f64.powf(ebn0_db / 10.0).sqrt())
}

/// Uncoded QPSK bit error rate over AWGN at `ebn0_db`. Bits are drawn in
/// fixed chunks, each from its own derived stream.
pub fn simulate_ber(ebn0_db: f64, bits: usize, seed: u64) -> Result<SimResult, SimError> {
    if bits == 0 || !bits.is_multiple_of(2) || !ebn0_db.is_finite() {
        return Err(SimError::InvalidConfig(format!("BER run of {bits} bits at {ebn0_db} dB")));
    }
    // two bits per unit-energy symbol
    let esn0_db = ebn0_db + linear_to_db(2.0);
    let chunks = bits.div_ceil(BER_CHUNK_BITS);
    let errors = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, c as u64);
            let len = BER_CHUNK_BITS.min(bits - c * BER_CHUNK_BITS);
            let tx_bits: Vec<u8> = (0..len).map(|_| u8::from(rng.random::<bool>())).collect();
            let tx = qpsk_modulate(&tx_bits)?;
            let rx = awgn_and_jam(&tx, esn0_db, &JammerSpec::off(), None, &mut rng)?;
            Ok(qpsk_hard_demod(&rx.samples).iter().zip(&tx_bits).filter(|(a, b)| a != b).count())
        })
        .collect::<Result<Vec<usize>, SimError>>()?
        .into_iter()
        .sum();
    Ok(SimResult::from_counts(errors, bits, seed))
}

/// Block error rate of `link` with `jammer` covering every coded symbol.
///
/// The receiver scales LLRs by the block's mean noise-plus-jammer variance.
pub fn simulate_bler(link: &LinkConfig, jammer: &JammerSpec) -> Result<SimResult, SimError> {
    link.validate()?;
    jammer.validate()?;
    if jammer.kind == JammerKind::Spoofing {
        return Err(SimError::InvalidConfig("spoofing is not a noise jammer".into()));
    }
    let frozen = match link.code {
        CodeSpec::Polar { n, k, design_snr_db } => Some(FrozenSet::bhattacharyya(n, k, design_snr_db)?),
        CodeSpec::None { .. } => None,
    };
    let k = link.code.info_bits();
    let errors = (0..link.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(link.seed, t);
            let info: Vec<u8> = (0..k).map(|_| u8::from(rng.random::<bool>())).collect();
            let coded = match &frozen {
                Some(f) => polar_encode(&info, f)?,
                None => info.clone(),
            };
            let tx = qpsk_modulate(&coded)?;
            let rx = awgn_and_jam(&tx, link.snr_db, jammer, None, &mut rng)?;
            let decoded = match &frozen {
                Some(f) => polar_decode_sc(&qpsk_llr(&rx.samples, rx.mean_impairment_var()), f)?,
                None => qpsk_hard_demod(&rx.samples),
            };
            Ok(usize::from(decoded != info))
        })
        .collect::<Result<Vec<usize>, SimError>>()?
        .into_iter()
        .sum();
    Ok(SimResult::from_counts(errors, link.trials, link.seed))
}

/// Observation window and calibrated threshold for PSS detection runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSetup {
    pub window_len: usize,
    pub snr_db: f64,
    pub calibration: DetectorCalibration,
}

impl DetectorSetup {
    pub const DEFAULT_WINDOW: usize = 256;
    pub const DEFAULT_FALSE_ALARM: f64 = 0.01;
    pub const DEFAULT_CALIBRATION_TRIALS: usize = 10_000;

    pub fn calibrate(
        window_len: usize,
        snr_db: f64,
        false_alarm: f64,
        calibration_trials: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        if !snr_db.is_finite() {
            return Err(SimError::InvalidConfig(format!("snr_db {snr_db}")));
        }
        let calibration = calibrate_pss_threshold(window_len, false_alarm, calibration_trials, seed)?;
        Ok(DetectorSetup { window_len, snr_db, calibration })
    }

    /// 256-sample window, 1% false alarm, 10^4 calibration trials.
    pub fn with_defaults(snr_db: f64, seed: u64) -> Result<Self, SimError> {
        Self::calibrate(
            Self::DEFAULT_WINDOW,
            snr_db,
            Self::DEFAULT_FALSE_ALARM,
            Self::DEFAULT_CALIBRATION_TRIALS,
            seed,
        )
    }
}

/// Probability that the transmitted (PSS id, lag) is the strongest candidate
/// above threshold when noise jamming at `js_ch_db` lands on the PSS samples.
pub fn simulate_pss_detection(
    js_ch_db: f64,
    trials: usize,
    seed: u64,
    setup: &DetectorSetup,
) -> Result<SimResult, SimError> {
    if trials == 0 {
        return Err(SimError::InvalidConfig("trials must be at least 1".into()));
    }
    let jammer = JammerSpec::on_channel(ChannelKind::Pss, js_ch_db);
    jammer.validate()?;
    let window = setup.window_len;
    let threshold = setup.calibration.threshold;
    let detected = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let id = rng.random_range(0..3u8);
            let lag = rng.random_range(0..=window - SYNC_SEQUENCE_LEN);
            let mut tx = vec![Complex64::new(0.0, 0.0); window];
            let mut labels = vec![ChannelKind::Unused; window];
            for (i, s) in gen_pss(id)?.to_complex().into_iter().enumerate() {
                tx[lag + i] = s;
                labels[lag + i] = ChannelKind::Pss;
            }
            let rx = awgn_and_jam(&tx, setup.snr_db, &jammer, Some(&labels), &mut rng)?;
            let top = detect_pss(&rx.samples, threshold)?.into_iter().next();
            Ok(usize::from(top.is_some_and(|c| c.n_id_2 == id && c.lag == lag)))
        })
        .collect::<Result<Vec<usize>, SimError>>()?
        .into_iter()
        .sum();
    Ok(SimResult::from_counts(detected, trials, seed))
}

/// Probability that the correct `n_id_1` is picked from a jammed SSS at known
/// timing and `n_id_2`.
pub fn simulate_sss_identification(
    js_ch_db: f64,
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<SimResult, SimError> {
    if trials == 0 || !snr_db.is_finite() {
        return Err(SimError::InvalidConfig(format!("{trials} trials at snr {snr_db} dB")));
    }
    let jammer = JammerSpec::on_channel(ChannelKind::Sss, js_ch_db);
    jammer.validate()?;
    let correct = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let id = CellId::new(rng.random_range(0..336u16), rng.random_range(0..3u8))?;
            let tx = gen_sss(id)?.to_complex();
            let rx = awgn_and_jam(&tx, snr_db, &jammer, None, &mut rng)?;
            let (n_id_1, _) = identify_sss(&rx.samples, id.n_id_2())?;
            Ok(usize::from(n_id_1 == id.n_id_1()))
        })
        .collect::<Result<Vec<usize>, SimError>>()?
        .into_iter()
        .sum();
    Ok(SimResult::from_counts(correct, trials, seed))
}

/// Jammer power grid in dB, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { start_db: -10.0, stop_db: 20.0, step_db: 1.0 }
    }
}

impl Sweep {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.start_db.is_finite()
            && self.stop_db.is_finite()
            && self.step_db > 0.0
            && self.stop_db >= self.start_db
            && (self.stop_db - self.start_db) / self.step_db <= 10_000.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!("sweep {self:?}")))
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let steps = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        (0..=steps).map(|i| self.start_db + i as f64 * self.step_db).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub js_ch_db: f64,
    /// Block error rate, or missed-detection/misidentification rate.
    pub failure: SimResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub channel: ChannelKind,
    /// First sweep point whose failure rate reaches 0.9.
    pub threshold_db: Option<f64>,
    pub points: Vec<SweepPoint>,
    /// Detector calibration, for PSS sweeps.
    pub calibration: Option<DetectorCalibration>,
}

/// Failure rate of `channel` at every sweep point. Every point reuses the
/// same per-trial streams, so neighbouring points differ only in jammer power.
///
/// PBCH, PBCH DM-RS and PDCCH use the coded link in `link`; PSS uses the
/// calibrated detector and SSS the ML identifier, both at `link.snr_db`.
pub fn failure_sweep(channel: ChannelKind, link: &LinkConfig, sweep: &Sweep) -> Result<ThresholdReport, SimError> {
    link.validate()?;
    sweep.validate()?;
    let mut calibration = None;
    let points = match channel {
        ChannelKind::Pbch | ChannelKind::PbchDmrs | ChannelKind::Pdcch => sweep
            .points()
            .into_iter()
            .map(|js| {
                let failure = simulate_bler(link, &JammerSpec::on_channel(channel, js))?;
                Ok(SweepPoint { js_ch_db: js, failure })
            })
            .collect::<Result<Vec<_>, SimError>>()?,
        ChannelKind::Pss => {
            let setup = DetectorSetup::with_defaults(link.snr_db, derive_seed(link.seed, u64::MAX))?;
            calibration = Some(setup.calibration);
            sweep
                .points()
                .into_iter()
                .map(|js| {
                    let pd = simulate_pss_detection(js, link.trials, link.seed, &setup)?;
                    Ok(SweepPoint { js_ch_db: js, failure: pd.complement() })
                })
                .collect::<Result<Vec<_>, SimError>>()?
        }
        ChannelKind::Sss => sweep
            .points()
            .into_iter()
            .map(|js| {
                let p = simulate_sss_identification(js, link.snr_db, link.trials, link.seed)?;
                Ok(SweepPoint { js_ch_db: js, failure: p.complement() })
            })
            .collect::<Result<Vec<_>, SimError>>()?,
        other => return Err(SimError::UnsupportedChannel { channel: other }),
    };
    let threshold_db = points
        .iter()
        .find(|p| p.failure.estimate >= DOS_FAILURE_LEVEL)
        .map(|p| p.js_ch_db);
    Ok(ThresholdReport { channel, threshold_db, points, calibration })
}

/// Linearly interpolated `x` where the curve `(x, y)` first crosses `level`.
pub fn level_crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 == level {
            Some(x0)
        } else if (y0 - level) * (y1 - level) < 0.0 || y1 == level {
            Some(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
        } else {
            None
        }
    })
}

/// Smallest swept jammer power at which `channel` fails at least 90% of the time.
pub fn dos_threshold(channel: ChannelKind, link: &LinkConfig, sweep: &Sweep) -> Result<ThresholdReport, SimError> {
    let report = failure_sweep(channel, link, sweep)?;
    if report.threshold_db.is_none() {
        let worst = report
            .points
            .iter()
            .max_by(|a, b| a.failure.estimate.total_cmp(&b.failure.estimate))
            .expect("sweep has at least one point");
        return Err(SimError::NoThresholdInRange {
            channel,
            max_metric: worst.failure.estimate,
            max_js_db: worst.js_ch_db,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ber_tracks_closed_form() {
        for ebn0 in [0.0, 4.0] {
            let r = simulate_ber(ebn0, 200_000, 5).unwrap();
            let p = theoretical_qpsk_ber(ebn0);
            assert!((r.estimate - p).abs() <= r.ci_halfwidth_95, "{ebn0} dB: {} vs {p}", r.estimate);
        }
        // Q(sqrt(2 * 10^0.4))
        assert!((theoretical_qpsk_ber(4.0) - 0.012_500_1).abs() < 1e-6);
    }

    #[test]
    fn ber_rejects_bad_runs() {
        assert!(simulate_ber(3.0, 0, 1).is_err());
        assert!(simulate_ber(3.0, 11, 1).is_err());
        assert!(simulate_ber(f64::NAN, 10, 1).is_err());
    }

    #[test]
    fn bler_extremes() {
        let low = simulate_bler(&LinkConfig::control_channel(-10.0, 500, 1), &JammerSpec::off()).unwrap();
        assert!(low.estimate >= 0.99);
        let high = simulate_bler(&LinkConfig::control_channel(10.0, 500, 1), &JammerSpec::off()).unwrap();
        assert!(high.estimate <= 0.01);
        // +10 dB jammer over a 10 dB link sits near -10 dB SINR
        let jammed = simulate_bler(
            &LinkConfig::control_channel(10.0, 500, 1),
            &JammerSpec::on_channel(ChannelKind::Pbch, 10.0),
        )
        .unwrap();
        assert!(jammed.estimate >= 0.9);
    }

    #[test]
    fn bler_is_reproducible() {
        let link = LinkConfig::control_channel(1.0, 300, 77);
        let j = JammerSpec::on_channel(ChannelKind::Pdcch, 0.0);
        assert_eq!(simulate_bler(&link, &j).unwrap(), simulate_bler(&link, &j).unwrap());
    }

    #[test]
    fn uncoded_blocks() {
        let link = LinkConfig { code: CodeSpec::None { block_bits: 2 }, ..LinkConfig::control_channel(6.8, 20_000, 3) };
        let r = simulate_bler(&link, &JammerSpec::off()).unwrap();
        // a two-bit block fails unless both rails survive
        let p = theoretical_qpsk_ber(6.8 - linear_to_db(2.0));
        let expected = 1.0 - (1.0 - p) * (1.0 - p);
        assert!((r.estimate - expected).abs() <= r.ci_halfwidth_95 + 1e-3, "{} vs {expected}", r.estimate);
    }

    #[test]
    fn invalid_links() {
        let ok = LinkConfig::control_channel(0.0, 10, 0);
        for bad in [
            LinkConfig { trials: 0, ..ok },
            LinkConfig { code: CodeSpec::Polar { n: 100, k: 30, design_snr_db: 0.0 }, ..ok },
            LinkConfig { code: CodeSpec::Polar { n: 64, k: 64, design_snr_db: 0.0 }, ..ok },
            LinkConfig { code: CodeSpec::None { block_bits: 3 }, ..ok },
            LinkConfig { snr_db: f64::INFINITY, ..ok },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        let spoof = JammerSpec { kind: JammerKind::Spoofing, target: ChannelKind::Pss, ..JammerSpec::barrage(0.0) };
        assert!(simulate_bler(&ok, &spoof).is_err());
    }

    #[test]
    fn crossing_interpolates() {
        let pts = [(0.0, 1.0), (1.0, 0.8), (2.0, 0.4), (3.0, 0.0)];
        assert!((level_crossing(&pts, 0.5).unwrap() - 1.75).abs() < 1e-12);
        assert_eq!(level_crossing(&pts, 0.8), Some(1.0));
        assert_eq!(level_crossing(&pts, 2.0), None);
        assert_eq!(level_crossing(&[(0.0, 0.0)], 0.5), None);
    }

    #[test]
    fn sweep_points() {
        assert_eq!(Sweep::default().points().len(), 31);
        assert_eq!(Sweep { start_db: 0.0, stop_db: 1.0, step_db: 0.5 }.points(), vec![0.0, 0.5, 1.0]);
        assert!(Sweep { start_db: 2.0, stop_db: 1.0, step_db: 1.0 }.validate().is_err());
        assert!(Sweep { start_db: 0.0, stop_db: 1.0, step_db: 0.0 }.validate().is_err());
    }

    #[test]
    fn pss_unjammed_and_swamped() {
        let setup = DetectorSetup::calibrate(256, 20.0, 0.01, 2000, 9).unwrap();
        let clean = simulate_pss_detection(f64::NEG_INFINITY, 2000, 1, &setup).unwrap();
        assert!(clean.estimate >= 0.999);
        let swamped = simulate_pss_detection(30.0, 500, 1, &setup).unwrap();
        assert!(swamped.estimate < 0.1);
    }

    #[test]
    fn sss_identification_degrades() {
        let clean = simulate_sss_identification(f64::NEG_INFINITY, 20.0, 200, 2).unwrap();
        assert_eq!(clean.estimate, 1.0);
        let swamped = simulate_sss_identification(30.0, 20.0, 200, 2).unwrap();
        assert!(swamped.estimate < 0.1);
    }

    #[test]
    fn threshold_crossing_and_errors() {
        let link = LinkConfig::control_channel(10.0, 300, 4);
        let r = dos_threshold(ChannelKind::Pbch, &link, &Sweep::default()).unwrap();
        let t = r.threshold_db.unwrap();
        assert!(t > -10.0 && t < 20.0);
        assert!(r.points.iter().filter(|p| p.js_ch_db < t).all(|p| p.failure.estimate < DOS_FAILURE_LEVEL));

        let capped = Sweep { start_db: -20.0, stop_db: -10.0, step_db: 1.0 };
        let e = dos_threshold(ChannelKind::Pss, &LinkConfig::control_channel(20.0, 200, 4), &capped);
        assert!(matches!(e, Err(SimError::NoThresholdInRange { channel: ChannelKind::Pss, .. })));
        assert!(matches!(
            dos_threshold(ChannelKind::Pdsch, &link, &Sweep::default()),
            Err(SimError::UnsupportedChannel { .. })
        ));
    }
}
