//! AWGN channel with an additive noise jammer on targeted REs.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::grid::ChannelKind;
use crate::rng::{complex_gaussian, db_to_linear};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammerKind {
    /// Whole band, full duty cycle.
    Barrage,
    /// Energy only on the target channel's REs.
    ChannelSelective,
    /// Fake-signal injection; handled by the defense simulation, adds no noise here.
    Spoofing,
}

/// Attack waveform. `js_ch_db` is the jammer power over the targeted REs
/// relative to the (unit) signal power on those REs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JammerSpec {
    pub kind: JammerKind,
    pub js_ch_db: f64,
    pub target: ChannelKind,
    pub duty_cycle: f64,
    pub synchronized: bool,
}

impl JammerSpec {
    /// A jammer that never transmits.
    pub fn off() -> Self {
        Self::barrage(f64::NEG_INFINITY)
    }

    pub fn barrage(js_ch_db: f64) -> Self {
        JammerSpec {
            kind: JammerKind::Barrage,
            js_ch_db,
            target: ChannelKind::Pdsch,
            duty_cycle: 1.0,
            synchronized: false,
        }
    }

    /// Time-synchronized jammer sitting exactly on `target`'s REs.
    pub fn on_channel(target: ChannelKind, js_ch_db: f64) -> Self {
        JammerSpec {
            kind: JammerKind::ChannelSelective,
            js_ch_db,
            target,
            duty_cycle: 1.0,
            synchronized: true,
        }
    }

    /// Unsynchronized pulsed jammer gating each RE on with probability `duty_cycle`.
    pub fn pulsed(target: ChannelKind, js_ch_db: f64, duty_cycle: f64) -> Self {
        JammerSpec {
            kind: JammerKind::ChannelSelective,
            js_ch_db,
            target,
            duty_cycle,
            synchronized: false,
        }
    }

    pub fn with_js(mut self, js_ch_db: f64) -> Self {
        self.js_ch_db = js_ch_db;
        self
    }

    pub fn is_off(&self) -> bool {
        self.kind == JammerKind::Spoofing || self.js_ch_db == f64::NEG_INFINITY
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |why: &str| Err(SimError::InvalidConfig(format!("jammer: {why}")));
        if self.js_ch_db.is_nan() || self.js_ch_db == f64::INFINITY {
            return bad("js_ch_db must be finite or -inf");
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 1.0) {
            return bad("duty_cycle must lie in (0, 1]");
        }
        match self.kind {
            JammerKind::Barrage if self.duty_cycle != 1.0 => bad("barrage jamming has duty_cycle 1"),
            JammerKind::Spoofing if self.target != ChannelKind::Pss => bad("spoofing targets the PSS only"),
            _ => Ok(()),
        }
    }

    fn covers(&self, label: Option<ChannelKind>) -> bool {
        match self.kind {
            JammerKind::Barrage => true,
            JammerKind::ChannelSelective => {
                label.is_none_or(|l| self.target.footprint().contains(&l))
            }
            JammerKind::Spoofing => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Received {
    pub samples: Vec<Complex64>,
    /// Which samples carried jammer energy.
    pub jammed: Vec<bool>,
    pub noise_var: f64,
    pub jam_var: f64,
}

impl Received {
    /// Mean noise-plus-jammer variance across the block.
    pub fn mean_impairment_var(&self) -> f64 {
        let hit = self.jammed.iter().filter(|&&j| j).count() as f64;
        self.noise_var + self.jam_var * hit / self.jammed.len().max(1) as f64
    }
}

/// Adds thermal noise at `snr_db` (relative to unit signal power) to every
/// symbol, plus Gaussian jamming at `js_ch_db` on the REs the jammer covers.
///
/// `labels`, when given, names the channel of each symbol; a channel-selective
/// jammer then skips off-target symbols. Without labels every symbol counts
/// as on-target.
pub fn awgn_and_jam<R: Rng + ?Sized>(
    symbols: &[Complex64],
    snr_db: f64,
    jammer: &JammerSpec,
    labels: Option<&[ChannelKind]>,
    rng: &mut R,
) -> Result<Received, SimError> {
    jammer.validate()?;
    if let Some(l) = labels {
        if l.len() != symbols.len() {
            return Err(SimError::SizeMismatch { expected: symbols.len(), got: l.len() });
        }
    }
    let noise_var = db_to_linear(-snr_db);
    let jam_var = if jammer.is_off() { 0.0 } else { db_to_linear(jammer.js_ch_db) };
    let mut samples = Vec::with_capacity(symbols.len());
    let mut jammed = Vec::with_capacity(symbols.len());
    for (i, &s) in symbols.iter().enumerate() {
        let mut y = s + complex_gaussian(rng, noise_var);
        let on_target = jam_var > 0.0 && jammer.covers(labels.map(|l| l[i]));
        let hit = on_target && (jammer.synchronized || rng.random_bool(jammer.duty_cycle));
        if hit {
            y += complex_gaussian(rng, jam_var);
        }
        samples.push(y);
        jammed.push(hit);
    }
    Ok(Received { samples, jammed, noise_var, jam_var })
}
