//! Grid predictor against the dead-reckoning baseline on the same script.

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::runner::run;
use crate::error::{Error, Result};
use crate::net::PredictorMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub predictor: PredictorMode,
    pub predicted_ticks: u64,
    pub predicted_entities: u64,
    pub mean_error: f64,
    pub max_error: f64,
    pub mean_divergence: f64,
}

/// Runs `cfg` once per predictor with identical seeds and bot scripts.
pub fn compare(cfg: &ScenarioConfig) -> Result<Vec<CompareRow>> {
    [PredictorMode::Grid, PredictorMode::DrBaseline]
        .into_iter()
        .map(|mode| {
            let mut c = cfg.clone();
            c.prediction.mode = mode;
            let s = run(&c)?.summary;
            Ok(CompareRow {
                predictor: mode,
                predicted_ticks: s.predicted_ticks,
                predicted_entities: s.predicted_entities,
                mean_error: s.mean_pred_error,
                max_error: s.max_pred_error,
                mean_divergence: s.mean_divergence,
            })
        })
        .collect()
}

pub fn write_compare_csv<W: std::io::Write>(out: W, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
