//! Synchronization-layer sequences: PSS m-sequences, SSS Gold sequences,
//! Zadoff-Chu preambles, and the correlation detector built on them.
//!
//! Everything here is in the sequence domain; subcarrier placement lives in
//! [`crate::grid`].

mod detect;
mod mseq;
mod zc;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detect::{
    calibrate_pss_threshold, detect_pss, identify_sss, periodic_xcorr, DetectorCalibration,
    PssCandidate,
};
pub use mseq::{gen_pss, gen_sss, PSS_SHIFT_PER_ID};
pub use zc::{gen_zadoff_chu, ZcSequence};

/// Length of PSS and SSS.
pub const SYNC_SEQUENCE_LEN: usize = 127;
/// Number of distinct physical cell IDs.
pub const CELL_ID_COUNT: u16 = 1008;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("invalid identifier: {0}")]
    InvalidId(String),
    #[error("invalid Zadoff-Chu parameters: root {root}, length {length}")]
    InvalidRoot { root: u32, length: u32 },
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("received {0} samples, need at least {1}")]
    TooShort(usize, usize),
    #[error("invalid detector setting: {0}")]
    InvalidDetector(String),
}

/// Physical cell identity, `cell_id = 3 * n_id_1 + n_id_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    n_id_1: u16,
    n_id_2: u8,
}

impl CellId {
    pub fn new(n_id_1: u16, n_id_2: u8) -> Result<Self, SequenceError> {
        if n_id_1 > 335 {
            return Err(SequenceError::InvalidId(format!("n_id_1 {n_id_1} outside 0..=335")));
        }
        if n_id_2 > 2 {
            return Err(SequenceError::InvalidId(format!("n_id_2 {n_id_2} outside 0..=2")));
        }
        Ok(CellId { n_id_1, n_id_2 })
    }

    pub fn from_cell_id(cell_id: u16) -> Result<Self, SequenceError> {
        if cell_id >= CELL_ID_COUNT {
            return Err(SequenceError::InvalidId(format!("cell id {cell_id} outside 0..=1007")));
        }
        Ok(CellId { n_id_1: cell_id / 3, n_id_2: (cell_id % 3) as u8 })
    }

    pub fn n_id_1(&self) -> u16 {
        self.n_id_1
    }

    pub fn n_id_2(&self) -> u8 {
        self.n_id_2
    }

    pub fn cell_id(&self) -> u16 {
        3 * self.n_id_1 + u16::from(self.n_id_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyncKind {
    Pss,
    Sss,
}

/// A length-127 BPSK sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncSequence {
    pub kind: SyncKind,
    values: Vec<i8>,
}

impl SyncSequence {
    pub(crate) fn new(kind: SyncKind, values: Vec<i8>) -> Self {
        debug_assert_eq!(values.len(), SYNC_SEQUENCE_LEN);
        SyncSequence { kind, values }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.values.iter().map(|&v| Complex64::new(f64::from(v), 0.0)).collect()
    }
}

/// Writes `index,re,im` rows for archiving a generated sequence.
pub fn write_sequence_csv<W: Write>(samples: &[Complex64], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["index", "re", "im"])?;
    for (i, s) in samples.iter().enumerate() {
        w.write_record([i.to_string(), s.re.to_string(), s.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
