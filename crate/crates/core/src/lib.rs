//! 5G NR physical-layer threat assessment: resource-grid sparsity, jamming
//! efficiency, link-level jamming simulation and PSS-spoofing defenses.

pub mod cli;
pub mod defense;
pub mod grid;
pub mod jamsim;
pub mod numerology;
pub mod rng;
pub mod sequences;
pub mod threat;
