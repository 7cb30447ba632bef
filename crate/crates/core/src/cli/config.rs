use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::defense::{AttackerModel, CellBeacon, ScenarioRandomization, SearchConfig};
use crate::grid::{ChannelKind, GridConfig};
use crate::jamsim::{CodeSpec, DetectorSetup, Sweep};
use crate::threat::{Attack, AttackOverride};

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct ThreatConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub overrides: BTreeMap<Attack, AttackOverride>,
}


fn default_sim_trials() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Blocks or detection attempts per sweep point.
    #[serde(default = "default_sim_trials")]
    pub trials: usize,
    #[serde(default)]
    pub ber: Option<BerSection>,
    #[serde(default)]
    pub bler: Option<BlerSection>,
    #[serde(default)]
    pub pss: Option<PssSection>,
    #[serde(default)]
    pub thresholds: Option<ThresholdSection>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            seed: default_seed(),
            trials: default_sim_trials(),
            ber: Some(BerSection::default()),
            bler: Some(BlerSection::default()),
            pss: Some(PssSection::default()),
            thresholds: Some(ThresholdSection::default()),
        }
    }
}

/// Uncoded QPSK over AWGN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSection {
    pub ebn0_db: Vec<f64>,
    pub bits: usize,
}

impl Default for BerSection {
    fn default() -> Self {
        BerSection { ebn0_db: vec![0.0, 2.0, 4.0, 6.0, 8.0], bits: 1_000_000 }
    }
}

fn default_target() -> ChannelKind {
    ChannelKind::Pbch
}
fn default_link_snr() -> f64 {
    10.0
}

/// Coded block error rate against a jammer sitting on `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlerSection {
    #[serde(default = "default_target")]
    pub target: ChannelKind,
    #[serde(default = "default_link_snr")]
    pub snr_db: f64,
    #[serde(default = "CodeSpec::default_polar")]
    pub code: CodeSpec,
    #[serde(default)]
    pub sweep: Sweep,
}

impl Default for BlerSection {
    fn default() -> Self {
        BlerSection { target: default_target(), snr_db: default_link_snr(), code: CodeSpec::default_polar(), sweep: Sweep::default() }
    }
}

fn default_detector_snr() -> f64 {
    20.0
}
fn default_window() -> usize {
    DetectorSetup::DEFAULT_WINDOW
}
fn default_false_alarm() -> f64 {
    DetectorSetup::DEFAULT_FALSE_ALARM
}
fn default_calibration_trials() -> usize {
    DetectorSetup::DEFAULT_CALIBRATION_TRIALS
}
fn default_pss_sweep() -> Sweep {
    Sweep { start_db: -10.0, stop_db: 30.0, step_db: 1.0 }
}

/// PSS detection probability under jamming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PssSection {
    #[serde(default = "default_detector_snr")]
    pub snr_db: f64,
    #[serde(default = "default_window")]
    pub window_len: usize,
    #[serde(default = "default_false_alarm")]
    pub false_alarm: f64,
    #[serde(default = "default_calibration_trials")]
    pub calibration_trials: usize,
    #[serde(default = "default_pss_sweep")]
    pub sweep: Sweep,
}

impl Default for PssSection {
    fn default() -> Self {
        PssSection {
            snr_db: default_detector_snr(),
            window_len: default_window(),
            false_alarm: default_false_alarm(),
            calibration_trials: default_calibration_trials(),
            sweep: default_pss_sweep(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdTarget {
    pub channel: ChannelKind,
    pub snr_db: f64,
}

/// DoS thresholds per channel over a shared sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub channels: Vec<ThresholdTarget>,
    #[serde(default = "CodeSpec::default_polar")]
    pub code: CodeSpec,
    #[serde(default)]
    pub sweep: Sweep,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        let t = |channel, snr_db| ThresholdTarget { channel, snr_db };
        ThresholdSection {
            channels: vec![
                t(ChannelKind::Pbch, default_link_snr()),
                t(ChannelKind::Pdcch, default_link_snr()),
                t(ChannelKind::Pss, default_detector_snr()),
                t(ChannelKind::Sss, default_detector_snr()),
            ],
            code: CodeSpec::default_polar(),
            sweep: Sweep::default(),
        }
    }
}

fn default_defend_trials() -> usize {
    1000
}
fn default_attacker() -> AttackerModel {
    AttackerModel::fake_pss(3, 6.0)
}
fn default_search() -> SearchConfig {
    SearchConfig::new(false)
}
fn default_offsets() -> Vec<f64> {
    vec![-6.0, -3.0, 0.0, 3.0, 6.0, 9.0, 12.0]
}

/// Paired mitigation-off/on evaluation. `search.mitigation_enabled` is
/// ignored; both arms always run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefendConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_defend_trials")]
    pub trials: usize,
    #[serde(default = "default_attacker")]
    pub attacker: AttackerModel,
    #[serde(default = "default_search")]
    pub search: SearchConfig,
    #[serde(default)]
    pub randomization: ScenarioRandomization,
    /// Extra P_DoS points over the attacker's power offset.
    #[serde(default = "default_offsets")]
    pub power_offsets_db: Vec<f64>,
    /// Fixed beacons for one deterministic search per arm.
    #[serde(default)]
    pub beacons: Vec<CellBeacon>,
    #[serde(default)]
    pub rotating: Option<RotatingSection>,
}

impl Default for DefendConfig {
    fn default() -> Self {
        DefendConfig {
            seed: default_seed(),
            trials: default_defend_trials(),
            attacker: default_attacker(),
            search: default_search(),
            randomization: ScenarioRandomization::default(),
            power_offsets_db: default_offsets(),
            beacons: Vec::new(),
            rotating: Some(RotatingSection::default()),
        }
    }
}

fn default_duration() -> f64 {
    10_000.0
}
fn default_rotating_decay() -> f64 {
    100.0
}

/// Blacklist growth against a per-frame rotating attacker, finite decay
/// against no decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotatingSection {
    #[serde(default = "default_duration")]
    pub duration_ms: f64,
    #[serde(default = "default_rotating_decay")]
    pub decay_ms: f64,
}

impl Default for RotatingSection {
    fn default() -> Self {
        RotatingSection { duration_ms: default_duration(), decay_ms: default_rotating_decay() }
    }
}
