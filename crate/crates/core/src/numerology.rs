//! 5G NR sub-6 GHz numerology: subcarrier spacings, slot counts, bandwidth
//! limits and the RB-count table for each (bandwidth, spacing) pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Subcarriers in one resource block.
pub const SUBCARRIERS_PER_RB: usize = 12;
/// OFDM symbols per slot (normal cyclic prefix).
pub const SYMBOLS_PER_SLOT: usize = 14;
/// Subframes per 10 ms radio frame.
pub const SUBFRAMES_PER_FRAME: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumerologyError {
    #[error("unknown subcarrier spacing {0} kHz")]
    UnknownSpacing(u32),
    #[error("no RB count defined for {bw_mhz} MHz at {scs_khz} kHz")]
    UnsupportedCombination { bw_mhz: f64, scs_khz: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandClass {
    /// Carriers below 6 GHz.
    Sub6,
    /// Carriers above 24 GHz.
    Mmwave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerology {
    pub scs_khz: u32,
    pub slots_per_subframe: u32,
    pub band_class: BandClass,
    pub min_bw_mhz: f64,
    pub max_bw_mhz: f64,
}

const NUMEROLOGIES: [Numerology; 5] = [
    Numerology { scs_khz: 15, slots_per_subframe: 1, band_class: BandClass::Sub6, min_bw_mhz: 4.32, max_bw_mhz: 49.5 },
    Numerology { scs_khz: 30, slots_per_subframe: 2, band_class: BandClass::Sub6, min_bw_mhz: 8.64, max_bw_mhz: 99.0 },
    Numerology { scs_khz: 60, slots_per_subframe: 4, band_class: BandClass::Sub6, min_bw_mhz: 17.28, max_bw_mhz: 198.0 },
    Numerology { scs_khz: 120, slots_per_subframe: 8, band_class: BandClass::Mmwave, min_bw_mhz: 34.56, max_bw_mhz: 396.0 },
    Numerology { scs_khz: 240, slots_per_subframe: 16, band_class: BandClass::Mmwave, min_bw_mhz: 69.12, max_bw_mhz: 397.44 },
];

/// Channel bandwidths (MHz) that index the RB table columns.
pub const TABLE_BANDWIDTHS_MHZ: [u32; 13] = [5, 10, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100];

// 0 marks a blank cell.
const RB_TABLE: [(u32, [u16; 13]); 3] = [
    (15, [25, 52, 79, 106, 133, 160, 216, 270, 0, 0, 0, 0, 0]),
    (30, [11, 24, 38, 51, 65, 78, 106, 133, 162, 189, 217, 245, 273]),
    (60, [0, 11, 18, 24, 31, 38, 51, 65, 79, 93, 107, 121, 135]),
];

/// Looks up the numerology row for a subcarrier spacing.
pub fn numerology_for(scs_khz: u32) -> Result<Numerology, NumerologyError> {
    NUMEROLOGIES
        .iter()
        .find(|n| n.scs_khz == scs_khz)
        .copied()
        .ok_or(NumerologyError::UnknownSpacing(scs_khz))
}

/// All defined numerologies, in increasing spacing order.
pub fn all_numerologies() -> &'static [Numerology] {
    &NUMEROLOGIES
}

/// Number of resource blocks for a channel bandwidth and a sub-6 GHz spacing.
///
/// Only the populated cells of the table are accepted; there is no
/// interpolation between bandwidths.
pub fn rb_count(bw_mhz: f64, scs_khz: u32) -> Result<usize, NumerologyError> {
    let unsupported = NumerologyError::UnsupportedCombination { bw_mhz, scs_khz };
    numerology_for(scs_khz)?;
    let row = RB_TABLE
        .iter()
        .find(|(scs, _)| *scs == scs_khz)
        .map(|(_, row)| row)
        .ok_or_else(|| unsupported.clone())?;
    let col = TABLE_BANDWIDTHS_MHZ
        .iter()
        .position(|&bw| (f64::from(bw) - bw_mhz).abs() < 1e-9)
        .ok_or_else(|| unsupported.clone())?;
    match row[col] {
        0 => Err(unsupported),
        n => Ok(usize::from(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDimensions {
    pub rb_count: usize,
    pub subcarriers: usize,
    pub slots_per_frame: usize,
    pub symbols_per_frame: usize,
    pub res_per_frame: usize,
}

impl GridDimensions {
    pub fn symbols_per_slot(&self) -> usize {
        SYMBOLS_PER_SLOT
    }
}

/// Size of one 10 ms frame's resource grid.
pub fn grid_dimensions(bw_mhz: f64, scs_khz: u32) -> Result<GridDimensions, NumerologyError> {
    let numerology = numerology_for(scs_khz)?;
    let rb_count = rb_count(bw_mhz, scs_khz)?;
    let subcarriers = SUBCARRIERS_PER_RB * rb_count;
    let slots_per_frame = SUBFRAMES_PER_FRAME * numerology.slots_per_subframe as usize;
    let symbols_per_frame = SYMBOLS_PER_SLOT * slots_per_frame;
    Ok(GridDimensions {
        rb_count,
        subcarriers,
        slots_per_frame,
        symbols_per_frame,
        res_per_frame: subcarriers * symbols_per_frame,
    })
}
