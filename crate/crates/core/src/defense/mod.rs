//! Initial cell search under PSS/SSS spoofing, with and without the
//! SSS-timer / MIB-timer / blacklist mitigation.

mod blacklist;
mod search;

use thiserror::Error;

pub use blacklist::{blacklist_step, BlacklistEvent, BlacklistKey, BlacklistState};
pub use search::{
    cell_search, simulate_dos_probability, simulate_rotating_blacklist, AttackerModel, BlacklistTrace,
    CellBeacon, ScenarioRandomization, SearchConfig, SearchOutcome, SAMPLES_PER_MS, SAMPLES_PER_SLOT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DefenseError {
    #[error("no beacons and no attacker")]
    EmptyEnvironment,
    #[error("clock moved backwards from {now_ms} ms to {to_ms} ms")]
    ClockRegression { now_ms: f64, to_ms: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
