//! One-parameter sweeps, run in parallel and reported in parameter order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LinkSpec, ScenarioConfig};
use super::runner::run;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    /// Latency rate in ms, pinned for the whole run.
    L,
    /// Game level.
    G,
    /// Loss probability of the client links.
    LossProb,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" | "latency" => Ok(Self::L),
            "G" | "g" | "game_level" => Ok(Self::G),
            "loss_prob" | "loss" => Ok(Self::LossProb),
            other => Err(Error::invalid(
                "param",
                format!("unknown sweep parameter `{other}` (use L, G or loss_prob)"),
            )),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L => "L",
            Self::G => "G",
            Self::LossProb => "loss_prob",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub mean_pred_error: f64,
    pub max_pred_error: f64,
    pub mean_interval: f64,
    pub stall_fraction: f64,
    pub predicted_ticks: u64,
    pub mean_ball_disp: f64,
    pub final_hash: String,
}

/// The config with `param` set to `value`.
pub fn apply(cfg: &ScenarioConfig, param: SweepParam, value: f64) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    match param {
        SweepParam::L => c.grid.latency_rate_ms = Some(value),
        SweepParam::G => {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
                return Err(Error::invalid(
                    "G",
                    format!("{value} is not a positive integer"),
                ));
            }
            c.grid.game_level = value as u32;
        }
        SweepParam::LossProb => {
            let mut link = c.client_link()?;
            link.loss_prob = value;
            c.topology.link = LinkSpec::Inline(link);
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn sweep(cfg: &ScenarioConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .map(|v| apply(cfg, param, *v).map(|c| (*v, c)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = configs
        .par_iter()
        .map(|(value, c)| {
            let out = run(c)?;
            let s = out.summary;
            Ok(SweepRow {
                param: param.to_string(),
                value: *value,
                mean_pred_error: s.mean_pred_error,
                max_pred_error: s.max_pred_error,
                mean_interval: s.mean_interval,
                stall_fraction: s.stall_fraction,
                predicted_ticks: s.predicted_ticks,
                mean_ball_disp: s.mean_ball_disp,
                final_hash: out.final_hash,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
