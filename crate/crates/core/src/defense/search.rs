//! Time-driven UE cell-search state machine.
//!
//! Timing offsets are counted in samples at 30.72 Msps within one SSB
//! period. The legitimate SSB sits in the first `ssb_window_ms` of the
//! period; fake PSS land anywhere after it.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BlacklistEvent, BlacklistKey, BlacklistState, DefenseError};
use crate::jamsim::SimResult;
use crate::rng::{derive_seed, trial_rng};

pub const SAMPLES_PER_MS: u64 = 30_720;
/// One 30 kHz slot.
pub const SAMPLES_PER_SLOT: u64 = SAMPLES_PER_MS / 2;

const FAKE_STREAM: u64 = 0xFA4E_0001;
const JITTER_STREAM: u64 = 0xFA4E_0002;
const SEARCH_STREAM: u64 = 0xFA4E_0003;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellBeacon {
    pub n_id_2: u8,
    pub n_id_1: Option<u16>,
    pub rx_power_db: f64,
    /// Samples from the start of the SSB period.
    pub timing_offset: u64,
    pub has_valid_sss: bool,
    pub mib_decodable: bool,
    pub legitimate: bool,
}

impl CellBeacon {
    pub fn legitimate(n_id_1: u16, n_id_2: u8, rx_power_db: f64, timing_offset: u64) -> Self {
        CellBeacon {
            n_id_2,
            n_id_1: Some(n_id_1),
            rx_power_db,
            timing_offset,
            has_valid_sss: true,
            mib_decodable: true,
            legitimate: true,
        }
    }

    fn key(&self, bucket: u64) -> BlacklistKey {
        BlacklistKey { n_id_2: self.n_id_2, timing_bucket: self.timing_offset / bucket }
    }
}

fn default_period_ms() -> f64 {
    20.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerModel {
    pub n_fake_pss: usize,
    /// Fake power relative to the strongest legitimate beacon.
    pub power_offset_db: f64,
    /// New sequence and timing for every fake each `period_ms`.
    #[serde(default)]
    pub rotate_each_frame: bool,
    #[serde(default = "default_period_ms")]
    pub period_ms: f64,
    /// Fakes carry an SSS too, so they fail at the MIB stage instead.
    #[serde(default)]
    pub spoof_sss: bool,
    /// Standard deviation of a per-fake power offset, fixed for a whole search.
    #[serde(default)]
    pub power_jitter_db: f64,
}

impl AttackerModel {
    pub fn none() -> Self {
        Self::fake_pss(0, 0.0)
    }

    pub fn fake_pss(n_fake_pss: usize, power_offset_db: f64) -> Self {
        AttackerModel {
            n_fake_pss,
            power_offset_db,
            rotate_each_frame: false,
            period_ms: default_period_ms(),
            spoof_sss: false,
            power_jitter_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), DefenseError> {
        let ok = self.power_offset_db.is_finite()
            && self.period_ms > 0.0
            && self.period_ms.is_finite()
            && self.power_jitter_db >= 0.0
            && self.power_jitter_db.is_finite();
        if ok {
            Ok(())
        } else {
            Err(DefenseError::InvalidConfig(format!("attacker {self:?}")))
        }
    }

    /// The fakes on air during `epoch`. Identities and timings come from
    /// `(seed, epoch)` when rotating and from `seed` alone otherwise; power
    /// jitter is drawn once per fake.
    pub fn fake_beacons(
        &self,
        reference_power_db: f64,
        epoch: u64,
        seed: u64,
        config: &SearchConfig,
    ) -> Vec<CellBeacon> {
        let epoch = if self.rotate_each_frame { epoch } else { 0 };
        let mut id_rng = trial_rng(derive_seed(seed, FAKE_STREAM), epoch);
        let mut power_rng = trial_rng(derive_seed(seed, JITTER_STREAM), 0);
        let jitter = Normal::new(0.0, self.power_jitter_db).expect("validated jitter");
        let (window, period) = config.ssb_window_samples();
        (0..self.n_fake_pss)
            .map(|_| {
                let n_id_2 = id_rng.random_range(0..3u8);
                let timing_offset = id_rng.random_range(window..period);
                let n_id_1 = self.spoof_sss.then(|| id_rng.random_range(0..336u16));
                CellBeacon {
                    n_id_2,
                    n_id_1,
                    rx_power_db: reference_power_db + self.power_offset_db + jitter.sample(&mut power_rng),
                    timing_offset,
                    has_valid_sss: self.spoof_sss,
                    mib_decodable: false,
                    legitimate: false,
                }
            })
            .collect()
    }
}

fn default_sss_timer() -> f64 {
    20.0
}
fn default_mib_timer() -> f64 {
    80.0
}
fn default_max_iterations() -> usize {
    50
}
fn default_decay() -> Option<f64> {
    Some(1000.0)
}
fn default_bucket() -> u64 {
    SAMPLES_PER_SLOT
}
fn default_ssb_window() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    -110.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_sss_timer")]
    pub sss_timer_ms: f64,
    #[serde(default = "default_mib_timer")]
    pub mib_timer_ms: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub mitigation_enabled: bool,
    /// `null` keeps blacklist entries forever.
    #[serde(default = "default_decay")]
    pub blacklist_decay_ms: Option<f64>,
    /// Width of the timing bucket in a blacklist identity, in samples.
    #[serde(default = "default_bucket")]
    pub identity_bucket_samples: u64,
    #[serde(default = "default_period_ms")]
    pub ssb_period_ms: f64,
    /// Span at the start of each period holding the legitimate SSB.
    #[serde(default = "default_ssb_window")]
    pub ssb_window_ms: f64,
    /// Beacons at or below this power are not detected.
    #[serde(default = "default_floor")]
    pub detection_floor_db: f64,
}

impl SearchConfig {
    pub fn new(mitigation_enabled: bool) -> Self {
        SearchConfig {
            sss_timer_ms: default_sss_timer(),
            mib_timer_ms: default_mib_timer(),
            max_iterations: default_max_iterations(),
            mitigation_enabled,
            blacklist_decay_ms: default_decay(),
            identity_bucket_samples: default_bucket(),
            ssb_period_ms: default_period_ms(),
            ssb_window_ms: default_ssb_window(),
            detection_floor_db: default_floor(),
        }
    }

    pub fn validate(&self) -> Result<(), DefenseError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let ok = positive(self.sss_timer_ms)
            && positive(self.mib_timer_ms)
            && self.max_iterations >= 1
            && self.identity_bucket_samples >= 1
            && positive(self.ssb_period_ms)
            && positive(self.ssb_window_ms)
            && self.ssb_window_ms < self.ssb_period_ms
            && self.detection_floor_db.is_finite()
            && self.blacklist_decay_ms.is_none_or(positive);
        if ok {
            Ok(())
        } else {
            Err(DefenseError::InvalidConfig(format!("search {self:?}")))
        }
    }

    fn ssb_window_samples(&self) -> (u64, u64) {
        let to_samples = |ms: f64| (ms * SAMPLES_PER_MS as f64).round() as u64;
        (to_samples(self.ssb_window_ms), to_samples(self.ssb_period_ms))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub camped: Option<CellBeacon>,
    /// True unless a legitimate, MIB-decodable cell was camped on.
    pub dos: bool,
    /// Candidate evaluations plus empty scans.
    pub iterations: usize,
    pub blacklist_size: usize,
    pub elapsed_ms: f64,
}

enum Verdict {
    Camp,
    Fail { after_ms: f64 },
}

fn evaluate(c: &CellBeacon, config: &SearchConfig) -> Verdict {
    if !c.has_valid_sss {
        Verdict::Fail { after_ms: config.sss_timer_ms }
    } else if !c.mib_decodable {
        Verdict::Fail { after_ms: config.mib_timer_ms }
    } else {
        Verdict::Camp
    }
}

/// Runs one UE cell search.
///
/// Without mitigation the UE rescans and retries the strongest PSS on every
/// iteration. With mitigation it walks the power-ranked candidate list,
/// blacklists each candidate whose SSS or MIB timer expires, and rescans
/// only when the list is used up.
pub fn cell_search(
    environment: &[CellBeacon],
    attacker: &AttackerModel,
    config: &SearchConfig,
    seed: u64,
) -> Result<SearchOutcome, DefenseError> {
    config.validate()?;
    attacker.validate()?;
    if environment.is_empty() && attacker.n_fake_pss == 0 {
        return Err(DefenseError::EmptyEnvironment);
    }
    let strongest = |legit_only: bool| {
        environment
            .iter()
            .filter(|b| b.legitimate || !legit_only)
            .map(|b| b.rx_power_db)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let reference = [strongest(true), strongest(false), 0.0]
        .into_iter()
        .find(|p| p.is_finite())
        .unwrap_or(0.0);
    let bucket = config.identity_bucket_samples;
    let scan = |t_ms: f64| {
        let epoch = (t_ms / attacker.period_ms).floor() as u64;
        let mut seen: Vec<CellBeacon> = environment
            .iter()
            .copied()
            .chain(attacker.fake_beacons(reference, epoch, seed, config))
            .filter(|b| b.rx_power_db > config.detection_floor_db)
            .collect();
        seen.sort_by(|a, b| {
            b.rx_power_db
                .total_cmp(&a.rx_power_db)
                .then(b.legitimate.cmp(&a.legitimate))
                .then(a.key(bucket).cmp(&b.key(bucket)))
        });
        seen
    };

    let mut blacklist = BlacklistState::new(config.blacklist_decay_ms)?;
    let mut t = 0.0;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        let mut candidates = scan(t);
        if config.mitigation_enabled {
            blacklist.apply(BlacklistEvent::Advance { to_ms: t })?;
            candidates.retain(|c| !blacklist.contains(&c.key(bucket)));
        } else {
            candidates.truncate(1);
        }
        if candidates.is_empty() {
            iterations += 1;
            t += config.ssb_period_ms;
            continue;
        }
        for c in &candidates {
            if iterations == config.max_iterations {
                break;
            }
            if config.mitigation_enabled && blacklist.contains(&c.key(bucket)) {
                continue;
            }
            iterations += 1;
            match evaluate(c, config) {
                Verdict::Camp => {
                    return Ok(SearchOutcome {
                        camped: Some(*c),
                        dos: !c.legitimate,
                        iterations,
                        blacklist_size: blacklist.len(),
                        elapsed_ms: t,
                    });
                }
                Verdict::Fail { after_ms } => {
                    t += after_ms;
                    if config.mitigation_enabled {
                        blacklist.apply(BlacklistEvent::Failed { key: c.key(bucket), at_ms: t })?;
                    }
                }
            }
        }
    }
    Ok(SearchOutcome { camped: None, dos: true, iterations, blacklist_size: blacklist.len(), elapsed_ms: t })
}

/// Per-trial draws for [`simulate_dos_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRandomization {
    /// Legitimate cell power, uniform over `[min, max]` dB.
    pub legit_power_min_db: f64,
    pub legit_power_max_db: f64,
    /// Replaces the attacker's per-fake power jitter.
    pub fake_power_jitter_db: f64,
}

impl Default for ScenarioRandomization {
    fn default() -> Self {
        ScenarioRandomization { legit_power_min_db: -100.0, legit_power_max_db: -80.0, fake_power_jitter_db: 3.0 }
    }
}

impl ScenarioRandomization {
    pub fn validate(&self) -> Result<(), DefenseError> {
        let ok = self.legit_power_min_db.is_finite()
            && self.legit_power_max_db.is_finite()
            && self.legit_power_min_db <= self.legit_power_max_db
            && self.fake_power_jitter_db >= 0.0
            && self.fake_power_jitter_db.is_finite();
        if ok {
            Ok(())
        } else {
            Err(DefenseError::InvalidConfig(format!("randomization {self:?}")))
        }
    }
}

/// Fraction of searches ending without a legitimate cell. Each trial draws
/// one legitimate cell (uniform power, random identity, timing inside the
/// SSB window) and an independent attacker seed.
pub fn simulate_dos_probability(
    attacker: &AttackerModel,
    config: &SearchConfig,
    randomization: &ScenarioRandomization,
    trials: usize,
    seed: u64,
) -> Result<SimResult, DefenseError> {
    if trials == 0 {
        return Err(DefenseError::InvalidConfig("trials must be at least 1".into()));
    }
    randomization.validate()?;
    let attacker = AttackerModel { power_jitter_db: randomization.fake_power_jitter_db, ..*attacker };
    let (window, _) = config.ssb_window_samples();
    let dos = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let power = if randomization.legit_power_max_db > randomization.legit_power_min_db {
                rng.random_range(randomization.legit_power_min_db..randomization.legit_power_max_db)
            } else {
                randomization.legit_power_min_db
            };
            let legit = CellBeacon::legitimate(
                rng.random_range(0..336u16),
                rng.random_range(0..3u8),
                power,
                rng.random_range(0..window.max(1)),
            );
            let outcome = cell_search(&[legit], &attacker, config, derive_seed(derive_seed(seed, SEARCH_STREAM), t))?;
            Ok(usize::from(outcome.dos))
        })
        .collect::<Result<Vec<usize>, DefenseError>>()?
        .into_iter()
        .sum();
    Ok(SimResult::from_counts(dos, trials, seed))
}

/// Blacklist size over time against an attacker whose fakes are all tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlacklistTrace {
    pub decay_ms: Option<f64>,
    /// `(time_ms, size)` after every blacklist insertion.
    pub samples: Vec<(f64, usize)>,
    pub max_size: usize,
    pub final_size: usize,
}

impl BlacklistTrace {
    /// Largest size seen at or after `from_ms`.
    pub fn max_after(&self, from_ms: f64) -> usize {
        self.samples.iter().filter(|(t, _)| *t >= from_ms).map(|s| s.1).max().unwrap_or(0)
    }
}

/// Plays `duration_ms` of attacker activity. Every fake is tried as soon as
/// it appears and fails its timer, one timer per fake running in parallel.
pub fn simulate_rotating_blacklist(
    attacker: &AttackerModel,
    config: &SearchConfig,
    duration_ms: f64,
    seed: u64,
) -> Result<BlacklistTrace, DefenseError> {
    config.validate()?;
    attacker.validate()?;
    if !(duration_ms > 0.0) || !duration_ms.is_finite() {
        return Err(DefenseError::InvalidConfig(format!("duration {duration_ms} ms")));
    }
    let timer = if attacker.spoof_sss { config.mib_timer_ms } else { config.sss_timer_ms };
    let epochs = (duration_ms / attacker.period_ms).ceil() as u64;
    let mut failures: Vec<(f64, BlacklistKey)> = (0..epochs)
        .flat_map(|e| {
            let start = e as f64 * attacker.period_ms;
            attacker.fake_beacons(0.0, e, seed, config).into_iter().map(move |b| {
                let appears = start + b.timing_offset as f64 / SAMPLES_PER_MS as f64;
                (appears + timer, b.key(config.identity_bucket_samples))
            })
        })
        .filter(|(t, _)| *t <= duration_ms)
        .collect();
    failures.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut blacklist = BlacklistState::new(config.blacklist_decay_ms)?;
    let mut samples = Vec::with_capacity(failures.len());
    for (at_ms, key) in failures {
        blacklist.apply(BlacklistEvent::Failed { key, at_ms })?;
        samples.push((at_ms, blacklist.len()));
    }
    blacklist.apply(BlacklistEvent::Advance { to_ms: duration_ms.max(blacklist.now_ms()) })?;
    let max_size = samples.iter().map(|s| s.1).max().unwrap_or(0);
    Ok(BlacklistTrace { decay_ms: config.blacklist_decay_ms, samples, max_size, final_size: blacklist.len() })
}
