//! Per-tick metrics rows and their CSV form.
//!
//! Column order is fixed: `tick, latency_ms, rho, interval, predicted,
//! predicted_entities, pred_error_mean, pred_error_max, unfrozen, messages_sent,
//! repartition, lost_inputs, late_inputs, divergence, ball_disp, stalled`.
//! Errors and divergence are in lattice steps against the lossless shadow run;
//! `ball_disp` is the committed ball's horizontal move in field units.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub tick: u64,
    pub latency_ms: f64,
    pub rho: f64,
    pub interval: f64,
    pub predicted: bool,
    pub predicted_entities: u32,
    pub pred_error_mean: f64,
    pub pred_error_max: f64,
    pub unfrozen: u32,
    pub messages_sent: u64,
    pub repartition: bool,
    pub lost_inputs: u32,
    pub late_inputs: u64,
    pub divergence: f64,
    pub ball_disp: f64,
    pub stalled: bool,
}

pub const COLUMNS: [&str; 16] = [
    "tick",
    "latency_ms",
    "rho",
    "interval",
    "predicted",
    "predicted_entities",
    "pred_error_mean",
    "pred_error_max",
    "unfrozen",
    "messages_sent",
    "repartition",
    "lost_inputs",
    "late_inputs",
    "divergence",
    "ball_disp",
    "stalled",
];

pub fn write_csv<W: Write>(out: W, rows: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_bytes(rows: &[MetricsRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(buf)
}

pub fn write_csv_file(path: &Path, rows: &[MetricsRecord]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(f), rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())))
        .collect()
}

/// Aggregates over one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ticks: u64,
    pub predicted_ticks: u64,
    pub predicted_entities: u64,
    /// Mean over every predicted entity of every tick.
    pub mean_pred_error: f64,
    pub max_pred_error: f64,
    pub mean_interval: f64,
    pub stall_fraction: f64,
    pub mean_ball_disp: f64,
    pub mean_divergence: f64,
    pub messages_sent: u64,
}

impl Summary {
    pub fn from_rows(rows: &[MetricsRecord]) -> Self {
        let n = rows.len().max(1) as f64;
        let entities: u64 = rows.iter().map(|r| u64::from(r.predicted_entities)).sum();
        let error_sum: f64 = rows
            .iter()
            .map(|r| r.pred_error_mean * f64::from(r.predicted_entities))
            .sum();
        Self {
            ticks: rows.len() as u64,
            predicted_ticks: rows.iter().filter(|r| r.predicted).count() as u64,
            predicted_entities: entities,
            mean_pred_error: if entities == 0 {
                0.0
            } else {
                error_sum / entities as f64
            },
            max_pred_error: rows.iter().map(|r| r.pred_error_max).fold(0.0, f64::max),
            mean_interval: rows.iter().map(|r| r.interval).sum::<f64>() / n,
            stall_fraction: rows.iter().filter(|r| r.stalled).count() as f64 / n,
            mean_ball_disp: rows.iter().map(|r| r.ball_disp).sum::<f64>() / n,
            mean_divergence: rows.iter().map(|r| r.divergence).sum::<f64>() / n,
            messages_sent: rows.iter().map(|r| r.messages_sent).sum(),
        }
    }
}
