use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DefenseError;

/// What a UE remembers about a rejected PSS: its sequence and coarse timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlacklistKey {
    pub n_id_2: u8,
    pub timing_bucket: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlacklistEvent {
    /// A candidate failed its timer at `at_ms`.
    Failed { key: BlacklistKey, at_ms: f64 },
    Advance { to_ms: f64 },
}

/// Unbounded blacklist whose entries expire `decay_ms` after their last
/// failure. `decay_ms = None` never forgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlacklistState {
    entries: BTreeMap<BlacklistKey, f64>,
    decay_ms: Option<f64>,
    now_ms: f64,
}

impl BlacklistState {
    pub fn new(decay_ms: Option<f64>) -> Result<Self, DefenseError> {
        if let Some(d) = decay_ms {
            if !(d > 0.0) || !d.is_finite() {
                return Err(DefenseError::InvalidConfig(format!("blacklist decay {d} ms")));
            }
        }
        Ok(BlacklistState { entries: BTreeMap::new(), decay_ms, now_ms: 0.0 })
    }

    pub fn now_ms(&self) -> f64 {
        self.now_ms
    }

    pub fn decay_ms(&self) -> Option<f64> {
        self.decay_ms
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lookups are exact: expired entries are gone after every step.
    pub fn contains(&self, key: &BlacklistKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &BlacklistKey> {
        self.entries.keys()
    }

    fn advance(&mut self, to_ms: f64) -> Result<(), DefenseError> {
        if to_ms.is_nan() || to_ms < self.now_ms {
            return Err(DefenseError::ClockRegression { now_ms: self.now_ms, to_ms });
        }
        self.now_ms = to_ms;
        self.entries.retain(|_, &mut expiry| expiry > to_ms);
        Ok(())
    }

    /// In-place form of [`blacklist_step`].
    pub fn apply(&mut self, event: BlacklistEvent) -> Result<(), DefenseError> {
        match event {
            BlacklistEvent::Advance { to_ms } => self.advance(to_ms),
            BlacklistEvent::Failed { key, at_ms } => {
                self.advance(at_ms)?;
                let expiry = self.decay_ms.map_or(f64::INFINITY, |d| at_ms + d);
                self.entries.insert(key, expiry);
                Ok(())
            }
        }
    }
}

/// Applies one event. The clock never runs backwards.
pub fn blacklist_step(state: BlacklistState, event: BlacklistEvent) -> Result<BlacklistState, DefenseError> {
    let mut next = state;
    next.apply(event)?;
    Ok(next)
}
