use serde::{Deserialize, Serialize};

/// Fewer events than this on either side flags the normal-approximation CI.
const MIN_EVENTS_FOR_CI: usize = 20;

/// A Monte-Carlo rate estimate with its normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub estimate: f64,
    pub ci_halfwidth_95: f64,
    pub trials: usize,
    pub events: usize,
    pub seed: u64,
    /// False when too few events (or non-events) were seen for the interval to mean much.
    pub ci_valid: bool,
}

impl SimResult {
    pub fn from_counts(events: usize, trials: usize, seed: u64) -> Self {
        assert!(trials > 0 && events <= trials, "{events} events in {trials} trials");
        let p = events as f64 / trials as f64;
        SimResult {
            estimate: p,
            ci_halfwidth_95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            events,
            seed,
            ci_valid: events.min(trials - events) >= MIN_EVENTS_FOR_CI,
        }
    }

    pub fn ci(&self) -> (f64, f64) {
        (
            (self.estimate - self.ci_halfwidth_95).max(0.0),
            (self.estimate + self.ci_halfwidth_95).min(1.0),
        )
    }

    /// Same counts seen from the other side: `1 - estimate`.
    pub fn complement(&self) -> Self {
        Self::from_counts(self.trials - self.events, self.trials, self.seed)
    }
}
