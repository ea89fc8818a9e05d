//! Adaptive background partitioning.
//!
//! The partitioning parameter is `rho = theta * G / L`: it grows with the game
//! level and shrinks with the latency rate. The lattice point interval `I` is
//! derived from `rho` so that each axis keeps at least `R` points across the
//! screen width. Both axes always share one interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameState;
use crate::region::{apply_freeze, compute_mdr};

/// Default partitioning constant, in ms times screen units.
pub const DEFAULT_THETA: f64 = 100.0;

/// Relative change in `I` below which a new `rho` does not trigger re-partitioning.
pub const REPARTITION_HYSTERESIS: f64 = 0.01;

/// Relative slack used when counting how many whole intervals fit in an extent.
const FIT_EPS: f64 = 1e-7;

/// Tolerance, in lattice steps, for lattice membership checks.
const MEMBER_EPS: f64 = 1e-6;

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

/// `theta * game_level / latency_rate`.
pub fn compute_rho(theta: f64, game_level: u32, latency_rate: f64) -> Result<f64> {
    require_positive("theta", theta)?;
    require_positive("latency_rate", latency_rate)?;
    if game_level == 0 {
        return Err(Error::invalid("game_level", "must be >= 1"));
    }
    Ok(theta * f64::from(game_level) / latency_rate)
}

/// Which arm of the interval rule a given `rho` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalBranch {
    /// `rho <= w_s/R`: `I = rho`.
    Direct,
    /// `w_s/R < rho <= 2 w_s/R`: `I = rho/2`.
    Halved,
    /// `rho > 2 w_s/R`: `I = w_s/R`.
    Capped,
}

/// Classifies `rho` against the interval rule. Ties take the first arm in order.
pub fn interval_branch(rho: f64, screen_width: f64, min_points: u32) -> IntervalBranch {
    let base = screen_width / f64::from(min_points);
    if rho <= base {
        IntervalBranch::Direct
    } else if rho <= 2.0 * screen_width / f64::from(min_points) {
        IntervalBranch::Halved
    } else {
        IntervalBranch::Capped
    }
}

/// Background partitioning point interval for `rho`.
pub fn compute_interval(rho: f64, screen_width: f64, min_points: u32) -> Result<f64> {
    require_positive("rho", rho)?;
    require_positive("screen_width", screen_width)?;
    if min_points == 0 {
        return Err(Error::invalid("min_points", "must be >= 1"));
    }
    Ok(match interval_branch(rho, screen_width, min_points) {
        IntervalBranch::Direct => rho,
        IntervalBranch::Halved => rho / 2.0,
        IntervalBranch::Capped => screen_width / f64::from(min_points),
    })
}

/// Full partitioning state for one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta: f64,
    pub game_level: u32,
    /// Latency rate `L` in milliseconds.
    pub latency_rate: f64,
    pub rho: f64,
    pub screen_width: f64,
    pub min_points: u32,
    pub interval: f64,
    pub x_max: f64,
    pub z_max: f64,
    pub y_max: f64,
}

impl GridSpec {
    pub fn new(
        theta: f64,
        game_level: u32,
        latency_rate: f64,
        screen_width: f64,
        min_points: u32,
        y_max: f64,
    ) -> Result<Self> {
        require_positive("y_max", y_max)?;
        let rho = compute_rho(theta, game_level, latency_rate)?;
        let interval = compute_interval(rho, screen_width, min_points)?;
        Ok(Self {
            theta,
            game_level,
            latency_rate,
            rho,
            screen_width,
            min_points,
            interval,
            x_max: screen_width,
            z_max: screen_width,
            y_max,
        })
    }

    /// Same game, new latency rate.
    pub fn with_latency(&self, latency_rate: f64) -> Result<Self> {
        Self::new(
            self.theta,
            self.game_level,
            latency_rate,
            self.screen_width,
            self.min_points,
            self.y_max,
        )
    }

    /// Same game, new partitioning parameter. The latency rate is back-solved from `rho`.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        require_positive("rho", rho)?;
        let interval = compute_interval(rho, self.screen_width, self.min_points)?;
        Ok(Self {
            latency_rate: self.theta * f64::from(self.game_level) / rho,
            rho,
            interval,
            ..self.clone()
        })
    }

    /// Whether moving to `new_interval` exceeds the re-partition hysteresis.
    pub fn needs_repartition(&self, new_interval: f64) -> bool {
        (new_interval - self.interval).abs() > REPARTITION_HYSTERESIS * self.interval
    }

    /// Largest lattice index on the x axis.
    pub fn max_index_x(&self) -> i64 {
        max_index(self.x_max, self.interval)
    }

    /// Largest lattice index on the z axis.
    pub fn max_index_z(&self) -> i64 {
        max_index(self.z_max, self.interval)
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.x_max, self.z_max)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        build_lattice(self.interval, self.screen_width)
    }
}

/// Number of whole intervals that fit in `extent`.
pub fn max_index(extent: f64, interval: f64) -> i64 {
    (extent / interval + FIT_EPS).floor() as i64
}

/// Nearest lattice index of an on-lattice coordinate.
pub fn index_of(v: f64, interval: f64) -> i64 {
    (v / interval).round() as i64
}

/// Coordinate of lattice index `k`. All positions in the engine are produced here,
/// so equal indices always give bit-identical coordinates.
pub fn coord(k: i64, interval: f64) -> f64 {
    k as f64 * interval
}

/// `v` moved by `steps` lattice points.
pub fn offset(v: f64, steps: i64, interval: f64) -> f64 {
    coord(index_of(v, interval) + steps, interval)
}

/// Signed lattice-step distance `a - b`.
pub fn lattice_delta(a: f64, b: f64, interval: f64) -> i64 {
    ((a - b) / interval).round() as i64
}

/// Nearest lattice point to `v` within `[0, extent]`; exact halves go toward zero.
pub fn snap(v: f64, interval: f64, extent: f64) -> f64 {
    let q = v / interval;
    let k = (q - 0.5).ceil() as i64;
    coord(k.clamp(0, max_index(extent, interval)), interval)
}

pub fn is_lattice_member(v: f64, interval: f64) -> bool {
    let q = v / interval;
    (q - q.round()).abs() <= MEMBER_EPS
}

/// The legal x and z coordinates of the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub points_x: Vec<f64>,
    pub points_z: Vec<f64>,
    pub interval: f64,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points_x.is_empty()
    }

    /// Whether `v` is a lattice coordinate, within `tol` screen units.
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        let i = self.points_x.partition_point(|p| *p < v - tol);
        self.points_x.get(i).is_some_and(|p| (p - v).abs() <= tol)
    }
}

/// Points `0, I, 2I, ...` up to the screen width, identical on both axes.
pub fn build_lattice(interval: f64, screen_width: f64) -> Result<Lattice> {
    require_positive("interval", interval)?;
    require_positive("screen_width", screen_width)?;
    if interval > screen_width {
        return Err(Error::invalid(
            "interval",
            format!("{interval} exceeds screen width {screen_width}"),
        ));
    }
    let points: Vec<f64> = (0..=max_index(screen_width, interval))
        .map(|k| coord(k, interval))
        .collect();
    Ok(Lattice {
        points_z: points.clone(),
        points_x: points,
        interval,
    })
}

/// Re-partitions `state` for a new `rho`: every entity is snapped to the new
/// lattice, the detailed region is rebuilt around the snapped ball and freeze
/// flags are reapplied. Index and time are untouched.
pub fn repartition(
    state: &GameState,
    new_rho: f64,
    spec: &GridSpec,
    mu: u32,
) -> Result<(GameState, GridSpec)> {
    let new_spec = spec.with_rho(new_rho)?;
    if new_spec.interval == state.interval {
        return Ok((state.clone(), new_spec));
    }
    let i = new_spec.interval;
    let mut next = state.clone();
    next.interval = i;
    for p in &mut next.players {
        p.pos.x = snap(p.pos.x, i, new_spec.x_max);
        p.pos.z = snap(p.pos.z, i, new_spec.z_max);
    }
    next.ball.pos.x = snap(next.ball.pos.x, i, new_spec.x_max);
    next.ball.pos.z = snap(next.ball.pos.z, i, new_spec.z_max);
    let region = compute_mdr((next.ball.pos.x, next.ball.pos.z), mu, i, new_spec.bounds())?;
    Ok((apply_freeze(&next, &region), new_spec))
}
