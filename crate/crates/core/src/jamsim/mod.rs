//! Monte-Carlo link-level jamming engine.
//!
//! QPSK over AWGN with a Gaussian noise jammer, a short polar code decoded
//! by successive cancellation, and PSS/SSS detection under jamming.

mod channel;
mod polar;
mod qpsk;
mod sim;
mod stats;

use thiserror::Error;

use crate::grid::ChannelKind;
use crate::sequences::SequenceError;

pub use channel::{awgn_and_jam, JammerKind, JammerSpec, Received};
pub use polar::{polar_decode_sc, polar_encode, FrozenSet};
pub use qpsk::{qpsk_hard_demod, qpsk_llr, qpsk_modulate};
pub use sim::{
    dos_threshold, failure_sweep, level_crossing, simulate_ber, simulate_bler, simulate_pss_detection,
    simulate_sss_identification, theoretical_qpsk_ber, CodeSpec, DetectorSetup, LinkConfig,
    Modulation, Sweep, DOS_FAILURE_LEVEL, SweepPoint, ThresholdReport,
};
pub use stats::SimResult;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("QPSK needs an even number of bits, got {0}")]
    OddLength(usize),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{channel} has no link model")]
    UnsupportedChannel { channel: ChannelKind },
    #[error("{channel}: failure metric never reached 0.9 (max {max_metric:.3} at {max_js_db} dB)")]
    NoThresholdInRange { channel: ChannelKind, max_metric: f64, max_js_db: f64 },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}
