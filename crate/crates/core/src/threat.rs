//! Jamming efficiency and attacker complexity per physical channel.
//!
//! `J/S_F` spreads the jammer power needed on a channel's own REs
//! (`J/S_CH`) over the whole frame: `J/S_F = J/S_CH + 10 log10(fraction)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{build_grid, ChannelKind, Direction, GridConfig, GridError};
use crate::rng::linear_to_db;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThreatError {
    #[error("RE fraction {0} is outside (0, 1]")]
    ZeroFraction(f64),
    #[error("distance {0} m is not positive")]
    NonPositiveDistance(f64),
    #[error("invalid attack table: {0}")]
    InvalidTable(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One attack from the reference table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Attack {
    Pdsch,
    Pbch,
    Pdcch,
    Pusch,
    Pucch,
    Prach,
    PssSpoofing,
    Sss,
    PbchDmrs,
}

impl Attack {
    /// In reference-table order.
    pub const ALL: [Attack; 9] = [
        Attack::Pdsch,
        Attack::Pbch,
        Attack::Pdcch,
        Attack::Pusch,
        Attack::Pucch,
        Attack::Prach,
        Attack::PssSpoofing,
        Attack::Sss,
        Attack::PbchDmrs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attack::Pdsch => "PDSCH",
            Attack::Pbch => "PBCH",
            Attack::Pdcch => "PDCCH",
            Attack::Pusch => "PUSCH",
            Attack::Pucch => "PUCCH",
            Attack::Prach => "PRACH",
            Attack::PssSpoofing => "PSS_SPOOFING",
            Attack::Sss => "SSS",
            Attack::PbchDmrs => "PBCH_DMRS",
        }
    }

    /// Row label as printed in the report table.
    pub fn display_name(self) -> &'static str {
        match self {
            Attack::Pdsch => "PDSCH (Downlink)",
            Attack::Pbch => "PBCH",
            Attack::Pdcch => "PDCCH",
            Attack::Pusch => "PUSCH (Uplink)",
            Attack::Pucch => "PUCCH",
            Attack::Prach => "PRACH",
            Attack::PssSpoofing => "PSS (Spoofing)",
            Attack::Sss => "SSS",
            Attack::PbchDmrs => "PBCH DM-RS",
        }
    }

    /// Grid channel the attack aims at.
    pub fn channel(self) -> ChannelKind {
        match self {
            Attack::Pdsch => ChannelKind::Pdsch,
            Attack::Pbch => ChannelKind::Pbch,
            Attack::Pdcch => ChannelKind::Pdcch,
            Attack::Pusch => ChannelKind::Pusch,
            Attack::Pucch => ChannelKind::Pucch,
            Attack::Prach => ChannelKind::Prach,
            Attack::PssSpoofing => ChannelKind::Pss,
            Attack::Sss => ChannelKind::Sss,
            Attack::PbchDmrs => ChannelKind::PbchDmrs,
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attack {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attack::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown attack {s:?}"))
    }
}

/// How much cell-specific configuration the attacker must learn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParamsRequired {
    None,
    Low,
    Medium,
    High,
}

impl ParamsRequired {
    pub fn score(self) -> u32 {
        match self {
            ParamsRequired::None => 0,
            ParamsRequired::Low => 1,
            ParamsRequired::Medium => 2,
            ParamsRequired::High => 3,
        }
    }
}

impl fmt::Display for ParamsRequired {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// REs an attack occupies when that is set by the attacker rather than the
/// legitimate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackOccupancy {
    /// REs touched over `frames` consecutive frames.
    pub re_count: usize,
    pub frames: usize,
    pub note: String,
}

impl AttackOccupancy {
    /// Three fake PSS of 127 REs each per 20 ms.
    pub fn default_pss_spoofing() -> Self {
        AttackOccupancy { re_count: 3 * 127, frames: 2, note: "3 fake PSS per 20 ms".into() }
    }

    pub fn fraction(&self, res_per_frame: usize) -> Result<f64, ThreatError> {
        if self.frames == 0 || self.re_count > self.frames * res_per_frame {
            return Err(ThreatError::InvalidTable(format!(
                "{} REs over {} frames of {res_per_frame}",
                self.re_count, self.frames
            )));
        }
        Ok(self.re_count as f64 / (self.frames * res_per_frame) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackProfile {
    pub attack: Attack,
    pub modulation: String,
    pub coding: String,
    pub sync_required: bool,
    pub params_required: ParamsRequired,
    pub js_ch_db: f64,
    /// Replaces the grid-derived fraction when set.
    pub occupancy: Option<AttackOccupancy>,
}

/// Per-attack changes to the default table; absent fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackOverride {
    #[serde(default)]
    pub js_ch_db: Option<f64>,
    #[serde(default)]
    pub sync_required: Option<bool>,
    #[serde(default)]
    pub params_required: Option<ParamsRequired>,
    #[serde(default)]
    pub occupancy: Option<AttackOccupancy>,
}

pub fn default_attack_table() -> Vec<AttackProfile> {
    use ParamsRequired as P;
    let row = |attack, modulation: &str, coding: &str, sync_required, params_required, js_ch_db| AttackProfile {
        attack,
        modulation: modulation.into(),
        coding: coding.into(),
        sync_required,
        params_required,
        js_ch_db,
        occupancy: None,
    };
    vec![
        row(Attack::Pdsch, "{4, 16, 64, 256}-QAM", "LDPC", false, P::None, 0.0),
        row(Attack::Pbch, "QPSK", "Polar", true, P::None, 0.0),
        row(Attack::Pdcch, "QPSK", "Polar", true, P::Medium, 0.0),
        row(Attack::Pusch, "{4, 16, 64, 256}-QAM", "LDPC", false, P::None, 0.0),
        row(Attack::Pucch, "QPSK", "Variety", true, P::High, 0.0),
        row(Attack::Prach, "Zadoff-Chu Sequence", "N/A", true, P::Medium, 10.0),
        AttackProfile {
            occupancy: Some(AttackOccupancy::default_pss_spoofing()),
            ..row(Attack::PssSpoofing, "M-Sequences", "N/A", false, P::None, 10.0)
        },
        row(Attack::Sss, "Gold Sequences", "N/A", true, P::None, 10.0),
        row(Attack::PbchDmrs, "QPSK", "N/A", true, P::Low, 3.0),
    ]
}

pub fn apply_overrides(
    table: &mut [AttackProfile],
    overrides: &BTreeMap<Attack, AttackOverride>,
) -> Result<(), ThreatError> {
    for (attack, o) in overrides {
        let row = table
            .iter_mut()
            .find(|r| r.attack == *attack)
            .ok_or_else(|| ThreatError::InvalidTable(format!("{attack} is not in the table")))?;
        if let Some(js) = o.js_ch_db {
            if !js.is_finite() {
                return Err(ThreatError::InvalidTable(format!("{attack}: js_ch_db {js}")));
            }
            row.js_ch_db = js;
        }
        if let Some(s) = o.sync_required {
            row.sync_required = s;
        }
        if let Some(p) = o.params_required {
            row.params_required = p;
        }
        if let Some(occ) = &o.occupancy {
            row.occupancy = Some(occ.clone());
        }
    }
    Ok(())
}

/// One assessed attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatEntry {
    pub attack: Attack,
    pub modulation: String,
    pub coding: String,
    pub re_fraction: f64,
    pub sync_required: bool,
    pub params_required: ParamsRequired,
    pub js_ch_db: f64,
    pub js_frame_db: f64,
    pub complexity_score: u32,
}

pub fn js_frame(js_ch_db: f64, re_fraction: f64) -> Result<f64, ThreatError> {
    check_fraction(re_fraction)?;
    Ok(js_ch_db + linear_to_db(re_fraction))
}

/// Power advantage over barrage jamming from hitting only `re_fraction` of the band.
pub fn jamming_gain(re_fraction: f64) -> Result<f64, ThreatError> {
    check_fraction(re_fraction)?;
    Ok(-linear_to_db(re_fraction))
}

fn check_fraction(f: f64) -> Result<(), ThreatError> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(ThreatError::ZeroFraction(f))
    }
}

pub fn complexity_score(sync_required: bool, params: ParamsRequired) -> u32 {
    u32::from(sync_required) + params.score()
}

/// Evaluates every row of `table` against the downlink and uplink grids
/// built from `config` (its `direction` is ignored). Output is sorted by
/// attack name.
pub fn assess(config: &GridConfig, table: &[AttackProfile]) -> Result<Vec<ThreatEntry>, ThreatError> {
    let downlink = build_grid(&config.clone().with_direction(Direction::Downlink))?;
    let uplink = build_grid(&config.clone().with_direction(Direction::Uplink))?;
    let mut entries = table
        .iter()
        .map(|p| {
            let channel = p.attack.channel();
            let grid = if channel.direction() == Some(Direction::Uplink) { &uplink } else { &downlink };
            let re_fraction = match &p.occupancy {
                Some(occ) => occ.fraction(grid.dims().res_per_frame)?,
                None => grid.footprint_fraction(channel),
            };
            Ok(ThreatEntry {
                attack: p.attack,
                modulation: p.modulation.clone(),
                coding: p.coding.clone(),
                re_fraction,
                sync_required: p.sync_required,
                params_required: p.params_required,
                js_ch_db: p.js_ch_db,
                js_frame_db: js_frame(p.js_ch_db, re_fraction)?,
                complexity_score: complexity_score(p.sync_required, p.params_required),
            })
        })
        .collect::<Result<Vec<_>, ThreatError>>()?;
    entries.sort_by(|a, b| a.attack.as_str().cmp(b.attack.as_str()));
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub attack: Attack,
    /// `-J/S_F`; larger is a cheaper attack.
    pub efficiency_db: f64,
    pub complexity_score: u32,
}

pub fn ranking_scatter(entries: &[ThreatEntry]) -> Vec<ScatterPoint> {
    entries
        .iter()
        .map(|e| ScatterPoint { attack: e.attack, efficiency_db: -e.js_frame_db, complexity_score: e.complexity_score })
        .collect()
}

/// Log-distance received power in dBm with a 1 m reference distance.
pub fn link_budget(
    tx_power_dbm: f64,
    antenna_gains_db: f64,
    path_loss_exponent: f64,
    reference_loss_db: f64,
    distance_m: f64,
) -> Result<f64, ThreatError> {
    if !(distance_m > 0.0) {
        return Err(ThreatError::NonPositiveDistance(distance_m));
    }
    Ok(tx_power_dbm + antenna_gains_db - (reference_loss_db + 10.0 * path_loss_exponent * distance_m.log10()))
}

/// Nearest whole dB, ties away from zero.
pub fn round_db(db: f64) -> i64 {
    db.round() as i64
}

/// Column set of the printed report table.
pub const REPORT_HEADER: [&str; 8] = [
    "Channel/Signal",
    "Modulation",
    "Coding",
    "% of REs",
    "Synch. Required",
    "Params. Required",
    "J/S_CH",
    "J/S_F",
];

impl ThreatEntry {
    /// Rounded, human-readable row matching [`REPORT_HEADER`].
    pub fn report_row(&self) -> [String; 8] {
        let yes_no = if self.sync_required { "Yes" } else { "No" };
        [
            self.attack.display_name().to_string(),
            self.modulation.clone(),
            self.coding.clone(),
            format!("{:.1}%", 100.0 * self.re_fraction),
            yes_no.to_string(),
            self.params_required.to_string(),
            format!("{} dB", round_db(self.js_ch_db)),
            format!("{} dB", round_db(self.js_frame_db)),
        ]
    }
}
