use crate::error::{Error, Result};

/// Smoothing factor for round-trip samples.
pub const RTT_SMOOTHING: f64 = 0.2;

/// Exponentially weighted moving average of round-trip times, seeded by the first
/// sample. This is the latency rate `L` fed to the partitioner.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyEstimator {
    alpha: f64,
    estimate: Option<f64>,
    samples: u64,
}

impl Default for LatencyEstimator {
    fn default() -> Self {
        Self::new(RTT_SMOOTHING)
    }
}

impl LatencyEstimator {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            estimate: None,
            samples: 0,
        }
    }

    pub fn record(&mut self, rtt_ms: f64) {
        self.samples += 1;
        self.estimate = Some(match self.estimate {
            None => rtt_ms,
            Some(e) => e + self.alpha * (rtt_ms - e),
        });
    }

    pub fn estimate(&self) -> Result<f64> {
        self.estimate.ok_or(Error::NotReady)
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }
}
