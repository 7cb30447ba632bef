//! Per-RE channel occupancy of one 10 ms FDD frame.
//!
//! The downlink builder lays out the SS/PBCH bursts, the CORESET and the
//! shared channel; the uplink builder places PUCCH at the band edges and a
//! PRACH window next to the lower PUCCH region. Sparsity figures for every
//! jamming attack are read off these grids.
//!
//! SSB layout used here: each block spans 240 subcarriers and five symbols
//! ordered `PSS, PBCH, SSS, PBCH, PBCH`. The sync sequences sit on subcarriers
//! 56..183 of the block and the rest of the block in those two symbols is
//! left empty. Blocks start on symbols 3 and 8 of a slot, two per slot.

mod occupancy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerology::{self, GridDimensions, NumerologyError, SUBCARRIERS_PER_RB, SYMBOLS_PER_SLOT};

pub use occupancy::{occupancy_map, OccupancyError, OccupancyMap};

/// Width of the SS/PBCH block in subcarriers.
pub const SSB_SUBCARRIERS: usize = 240;
/// Length of the PSS/SSS sequences, and their width in subcarriers.
pub const SYNC_SUBCARRIERS: usize = 127;
/// First sync subcarrier within the SSB.
pub const SYNC_OFFSET_IN_SSB: usize = 56;
/// PBCH symbols per SSB.
pub const PBCH_SYMBOLS_PER_SSB: usize = 3;
/// DM-RS spacing inside the PBCH region.
pub const PBCH_DMRS_SPACING: usize = 4;

const SSB_SYMBOL_LAYOUT: [SsbSymbol; 5] =
    [SsbSymbol::Pss, SsbSymbol::Pbch, SsbSymbol::Sss, SsbSymbol::Pbch, SsbSymbol::Pbch];
const SSB_START_SYMBOLS: [usize; 2] = [3, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SsbSymbol {
    Pss,
    Sss,
    Pbch,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error(transparent)]
    Numerology(#[from] NumerologyError),
    #[error("configuration conflict: {0}")]
    ConfigConflict(String),
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChannelKind {
    Pss,
    Sss,
    Pbch,
    PbchDmrs,
    Pdcch,
    Pdsch,
    Pucch,
    Prach,
    Pusch,
    Unused,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 10] = [
        ChannelKind::Pss,
        ChannelKind::Sss,
        ChannelKind::Pbch,
        ChannelKind::PbchDmrs,
        ChannelKind::Pdcch,
        ChannelKind::Pdsch,
        ChannelKind::Pucch,
        ChannelKind::Prach,
        ChannelKind::Pusch,
        ChannelKind::Unused,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Pss => "PSS",
            ChannelKind::Sss => "SSS",
            ChannelKind::Pbch => "PBCH",
            ChannelKind::PbchDmrs => "PBCH_DMRS",
            ChannelKind::Pdcch => "PDCCH",
            ChannelKind::Pdsch => "PDSCH",
            ChannelKind::Pucch => "PUCCH",
            ChannelKind::Prach => "PRACH",
            ChannelKind::Pusch => "PUSCH",
            ChannelKind::Unused => "UNUSED",
        }
    }

    /// Direction the channel belongs to; `None` for `Unused`.
    pub fn direction(self) -> Option<Direction> {
        match self {
            ChannelKind::Pss
            | ChannelKind::Sss
            | ChannelKind::Pbch
            | ChannelKind::PbchDmrs
            | ChannelKind::Pdcch
            | ChannelKind::Pdsch => Some(Direction::Downlink),
            ChannelKind::Pucch | ChannelKind::Prach | ChannelKind::Pusch => Some(Direction::Uplink),
            ChannelKind::Unused => None,
        }
    }

    /// Labels a jammer has to cover to hit this channel. The PBCH region
    /// carries its own DM-RS, so PBCH jamming covers both.
    pub fn footprint(self) -> &'static [ChannelKind] {
        match self {
            ChannelKind::Pbch => &[ChannelKind::Pbch, ChannelKind::PbchDmrs],
            ChannelKind::Pss => &[ChannelKind::Pss],
            ChannelKind::Sss => &[ChannelKind::Sss],
            ChannelKind::PbchDmrs => &[ChannelKind::PbchDmrs],
            ChannelKind::Pdcch => &[ChannelKind::Pdcch],
            ChannelKind::Pdsch => &[ChannelKind::Pdsch],
            ChannelKind::Pucch => &[ChannelKind::Pucch],
            ChannelKind::Prach => &[ChannelKind::Prach],
            ChannelKind::Pusch => &[ChannelKind::Pusch],
            ChannelKind::Unused => &[ChannelKind::Unused],
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown channel label {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Downlink,
    Uplink,
}

fn default_true() -> bool {
    true
}
fn default_coreset_time_dur() -> u8 {
    1
}
fn default_pucch_fraction() -> f64 {
    0.10
}
fn default_prach_fraction() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub bw_mhz: f64,
    pub scs_khz: u32,
    #[serde(default = "default_true")]
    pub carrier_below_3ghz: bool,
    pub direction: Direction,
    /// CORESET duration in symbols, 1..=3.
    #[serde(default = "default_coreset_time_dur")]
    pub coreset_time_dur: u8,
    /// CORESET width in subcarriers; `None` spans the full band.
    #[serde(default)]
    pub coreset_subcarrier_span: Option<usize>,
    /// SS/PBCH blocks per frame; `None` picks 4 below 3 GHz and 8 above.
    #[serde(default)]
    pub ssb_blocks_per_frame: Option<usize>,
    /// Lowest subcarrier of the SSB; `None` centers it in the band.
    #[serde(default)]
    pub ssb_subcarrier_offset: Option<usize>,
    #[serde(default = "default_pucch_fraction")]
    pub pucch_fraction: f64,
    #[serde(default = "default_prach_fraction")]
    pub prach_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl GridConfig {
    /// 20 MHz, 30 kHz, carrier below 3 GHz, FDD downlink.
    pub fn reference() -> Self {
        GridConfig {
            bw_mhz: 20.0,
            scs_khz: 30,
            carrier_below_3ghz: true,
            direction: Direction::Downlink,
            coreset_time_dur: default_coreset_time_dur(),
            coreset_subcarrier_span: None,
            ssb_blocks_per_frame: None,
            ssb_subcarrier_offset: None,
            pucch_fraction: default_pucch_fraction(),
            prach_fraction: default_prach_fraction(),
        }
    }

    pub fn reference_uplink() -> Self {
        Self::reference().with_direction(Direction::Uplink)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn ssb_blocks(&self) -> usize {
        self.ssb_blocks_per_frame
            .unwrap_or(if self.carrier_below_3ghz { 4 } else { 8 })
    }

    /// Slots that may carry SS/PBCH blocks.
    pub fn ssb_slot_budget(&self) -> usize {
        if self.carrier_below_3ghz {
            2
        } else {
            4
        }
    }

    /// True when the config matches the assumptions behind the reference
    /// sparsity table (20 MHz, 30 kHz, below 3 GHz, default SSB burst).
    pub fn is_reference_setup(&self) -> bool {
        (self.bw_mhz - 20.0).abs() < 1e-9
            && self.scs_khz == 30
            && self.carrier_below_3ghz
            && self.ssb_blocks() == 4
    }

    fn validate(&self, dims: &GridDimensions) -> Result<(), GridError> {
        if !(1..=3).contains(&self.coreset_time_dur) {
            return Err(GridError::InvalidConfig(format!(
                "coreset_time_dur must be 1, 2 or 3, got {}",
                self.coreset_time_dur
            )));
        }
        if let Some(span) = self.coreset_subcarrier_span {
            if span > dims.subcarriers {
                return Err(GridError::InvalidConfig(format!(
                    "coreset_subcarrier_span {span} exceeds {} subcarriers",
                    dims.subcarriers
                )));
            }
        }
        for (name, f) in [("pucch_fraction", self.pucch_fraction), ("prach_fraction", self.prach_fraction)] {
            if !(0.0..=1.0).contains(&f) {
                return Err(GridError::InvalidConfig(format!("{name} must lie in [0, 1], got {f}")));
            }
        }
        Ok(())
    }
}

/// Channel label for every RE of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceGrid {
    dims: GridDimensions,
    direction: Direction,
    // symbol-major: labels[symbol * subcarriers + subcarrier]
    labels: Vec<ChannelKind>,
}

impl ResourceGrid {
    fn filled(dims: GridDimensions, direction: Direction, fill: ChannelKind) -> Self {
        ResourceGrid { dims, direction, labels: vec![fill; dims.res_per_frame] }
    }

    pub(crate) fn from_labels(
        dims: GridDimensions,
        direction: Direction,
        labels: Vec<ChannelKind>,
    ) -> Self {
        debug_assert_eq!(labels.len(), dims.subcarriers * dims.symbols_per_frame);
        ResourceGrid { dims, direction, labels }
    }

    pub fn dims(&self) -> &GridDimensions {
        &self.dims
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn label(&self, subcarrier: usize, symbol: usize) -> ChannelKind {
        self.labels[symbol * self.dims.subcarriers + subcarrier]
    }

    /// Labels of one OFDM symbol, lowest subcarrier first.
    pub fn symbol_row(&self, symbol: usize) -> &[ChannelKind] {
        let n = self.dims.subcarriers;
        &self.labels[symbol * n..(symbol + 1) * n]
    }

    pub fn labels(&self) -> &[ChannelKind] {
        &self.labels
    }

    fn set(&mut self, subcarrier: usize, symbol: usize, kind: ChannelKind) {
        self.labels[symbol * self.dims.subcarriers + subcarrier] = kind;
    }

    fn fill_rect(&mut self, subcarriers: std::ops::Range<usize>, symbol: usize, kind: ChannelKind) {
        let n = self.dims.subcarriers;
        self.labels[symbol * n + subcarriers.start..symbol * n + subcarriers.end].fill(kind);
    }

    /// RE count per label, indexed like `ChannelKind::ALL`.
    pub fn counts(&self) -> [usize; 10] {
        let mut counts = [0usize; 10];
        for k in &self.labels {
            counts[k.index()] += 1;
        }
        counts
    }

    pub fn re_count(&self, kind: ChannelKind) -> usize {
        self.labels.iter().filter(|&&k| k == kind).count()
    }

    /// REs a jammer must cover to hit `kind` (see [`ChannelKind::footprint`]).
    pub fn footprint_count(&self, kind: ChannelKind) -> usize {
        let counts = self.counts();
        kind.footprint().iter().map(|k| counts[k.index()]).sum()
    }

    pub fn footprint_fraction(&self, kind: ChannelKind) -> f64 {
        self.footprint_count(kind) as f64 / self.dims.res_per_frame as f64
    }

    /// Distinct subcarriers carrying `kind` anywhere in the frame.
    pub fn subcarriers_with(&self, kind: ChannelKind) -> Vec<usize> {
        (0..self.dims.subcarriers)
            .filter(|&sc| (0..self.dims.symbols_per_frame).any(|sym| self.label(sc, sym) == kind))
            .collect()
    }

    /// Distinct symbols carrying `kind` anywhere in the band.
    pub fn symbols_with(&self, kind: ChannelKind) -> Vec<usize> {
        (0..self.dims.symbols_per_frame)
            .filter(|&sym| self.symbol_row(sym).contains(&kind))
            .collect()
    }
}

/// Fraction of the frame's REs labelled `kind`.
pub fn re_fraction(grid: &ResourceGrid, kind: ChannelKind) -> f64 {
    grid.re_count(kind) as f64 / grid.dims.res_per_frame as f64
}

/// Builds either direction from the config's `direction` field.
pub fn build_grid(config: &GridConfig) -> Result<ResourceGrid, GridError> {
    match config.direction {
        Direction::Downlink => build_downlink_grid(config),
        Direction::Uplink => build_uplink_grid(config),
    }
}

pub fn build_downlink_grid(config: &GridConfig) -> Result<ResourceGrid, GridError> {
    if config.direction != Direction::Downlink {
        return Err(GridError::InvalidConfig("build_downlink_grid needs direction=downlink".into()));
    }
    let dims = numerology::grid_dimensions(config.bw_mhz, config.scs_khz)?;
    config.validate(&dims)?;

    let blocks = config.ssb_blocks();
    let max_blocks = SSB_START_SYMBOLS.len() * config.ssb_slot_budget();
    if blocks > max_blocks {
        return Err(GridError::ConfigConflict(format!(
            "{blocks} SS/PBCH blocks do not fit in the first {} slots (max {max_blocks})",
            config.ssb_slot_budget()
        )));
    }
    if dims.subcarriers < SSB_SUBCARRIERS {
        return Err(GridError::ConfigConflict(format!(
            "SS/PBCH block needs {SSB_SUBCARRIERS} subcarriers, band has {}",
            dims.subcarriers
        )));
    }
    let ssb_start = config
        .ssb_subcarrier_offset
        .unwrap_or((dims.subcarriers - SSB_SUBCARRIERS) / 2);
    if ssb_start + SSB_SUBCARRIERS > dims.subcarriers {
        return Err(GridError::ConfigConflict(format!(
            "SSB offset {ssb_start} pushes the block past subcarrier {}",
            dims.subcarriers
        )));
    }

    let mut grid = ResourceGrid::filled(dims, Direction::Downlink, ChannelKind::Pdsch);

    let coreset_span = config.coreset_subcarrier_span.unwrap_or(dims.subcarriers);
    for slot in 0..dims.slots_per_frame {
        for sym in 0..usize::from(config.coreset_time_dur) {
            grid.fill_rect(0..coreset_span, slot * SYMBOLS_PER_SLOT + sym, ChannelKind::Pdcch);
        }
    }

    let ssb = ssb_start..ssb_start + SSB_SUBCARRIERS;
    let sync = ssb_start + SYNC_OFFSET_IN_SSB..ssb_start + SYNC_OFFSET_IN_SSB + SYNC_SUBCARRIERS;
    for block in 0..blocks {
        let slot = block / SSB_START_SYMBOLS.len();
        let first = slot * SYMBOLS_PER_SLOT + SSB_START_SYMBOLS[block % SSB_START_SYMBOLS.len()];
        for (i, role) in SSB_SYMBOL_LAYOUT.iter().enumerate() {
            let sym = first + i;
            match role {
                SsbSymbol::Pss | SsbSymbol::Sss => {
                    grid.fill_rect(ssb.clone(), sym, ChannelKind::Unused);
                    let kind = if *role == SsbSymbol::Pss { ChannelKind::Pss } else { ChannelKind::Sss };
                    grid.fill_rect(sync.clone(), sym, kind);
                }
                SsbSymbol::Pbch => {
                    for sc in ssb.clone() {
                        let kind = if (sc - ssb_start).is_multiple_of(PBCH_DMRS_SPACING) {
                            ChannelKind::PbchDmrs
                        } else {
                            ChannelKind::Pbch
                        };
                        grid.set(sc, sym, kind);
                    }
                }
            }
        }
    }
    Ok(grid)
}

pub fn build_uplink_grid(config: &GridConfig) -> Result<ResourceGrid, GridError> {
    if config.direction != Direction::Uplink {
        return Err(GridError::InvalidConfig("build_uplink_grid needs direction=uplink".into()));
    }
    let dims = numerology::grid_dimensions(config.bw_mhz, config.scs_khz)?;
    config.validate(&dims)?;
    if config.pucch_fraction + config.prach_fraction > 1.0 {
        return Err(GridError::ConfigConflict(format!(
            "pucch_fraction + prach_fraction = {} exceeds 1",
            config.pucch_fraction + config.prach_fraction
        )));
    }

    let rbs = dims.rb_count;
    let pucch_rbs = (config.pucch_fraction * rbs as f64).round() as usize;
    let prach_rbs = (config.prach_fraction * rbs as f64).round() as usize;
    if pucch_rbs + prach_rbs > rbs {
        return Err(GridError::ConfigConflict(format!(
            "{pucch_rbs} PUCCH + {prach_rbs} PRACH RBs exceed {rbs} RBs"
        )));
    }
    let lower_pucch = pucch_rbs.div_ceil(2);
    let upper_pucch = pucch_rbs / 2;

    let mut grid = ResourceGrid::filled(dims, Direction::Uplink, ChannelKind::Pusch);
    let rb = |n: usize| n * SUBCARRIERS_PER_RB;
    let lower = 0..rb(lower_pucch);
    let prach = rb(lower_pucch)..rb(lower_pucch + prach_rbs);
    let upper = rb(rbs - upper_pucch)..rb(rbs);
    for sym in 0..dims.symbols_per_frame {
        grid.fill_rect(lower.clone(), sym, ChannelKind::Pucch);
        grid.fill_rect(upper.clone(), sym, ChannelKind::Pucch);
        grid.fill_rect(prach.clone(), sym, ChannelKind::Prach);
    }
    Ok(grid)
}
