//! More Detailed Region (MDR) management.
//!
//! The MDR is the square of half-width `mu * I` around the ball, clamped to the
//! field. Everything outside it is the Less Detailed Region and is frozen.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameState;

const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// Ball position `(alpha, beta)` the region was built around.
    pub anchor: (f64, f64),
    pub mu: u32,
    pub interval: f64,
    /// `(a-μI, b-μI)`, `(a-μI, b+μI)`, `(a+μI, b-μI)`, `(a+μI, b+μI)` after clamping.
    pub corners: [(f64, f64); 4],
    pub bounds: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    Mdr,
    Ldr,
}

impl Region {
    pub fn min_x(&self) -> f64 {
        self.corners[0].0
    }

    pub fn max_x(&self) -> f64 {
        self.corners[3].0
    }

    pub fn min_z(&self) -> f64 {
        self.corners[0].1
    }

    pub fn max_z(&self) -> f64 {
        self.corners[3].1
    }

    /// Closed-rectangle membership.
    pub fn contains(&self, (x, z): (f64, f64)) -> bool {
        x >= self.min_x() - EDGE_EPS
            && x <= self.max_x() + EDGE_EPS
            && z >= self.min_z() - EDGE_EPS
            && z <= self.max_z() + EDGE_EPS
    }

    pub fn classify(&self, pos: (f64, f64)) -> Zone {
        classify(pos, self)
    }
}

pub fn compute_mdr(ball: (f64, f64), mu: u32, interval: f64, bounds: (f64, f64)) -> Result<Region> {
    if mu == 0 {
        return Err(Error::invalid("mu", "must be >= 1"));
    }
    let (alpha, beta) = ball;
    let (x_max, z_max) = bounds;
    if !(-EDGE_EPS..=x_max + EDGE_EPS).contains(&alpha)
        || !(-EDGE_EPS..=z_max + EDGE_EPS).contains(&beta)
    {
        return Err(Error::OutOfBounds {
            x: alpha,
            z: beta,
            x_max,
            z_max,
        });
    }
    let reach = f64::from(mu) * interval;
    let lo_x = (alpha - reach).clamp(0.0, x_max);
    let hi_x = (alpha + reach).clamp(0.0, x_max);
    let lo_z = (beta - reach).clamp(0.0, z_max);
    let hi_z = (beta + reach).clamp(0.0, z_max);
    Ok(Region {
        anchor: ball,
        mu,
        interval,
        corners: [(lo_x, lo_z), (lo_x, hi_z), (hi_x, lo_z), (hi_x, hi_z)],
        bounds,
    })
}

pub fn classify(pos: (f64, f64), region: &Region) -> Zone {
    if region.contains(pos) {
        Zone::Mdr
    } else {
        Zone::Ldr
    }
}

/// Installs `region` as the state's MDR and sets every player's frozen flag from
/// its zone. Positions are never touched.
pub fn apply_freeze(state: &GameState, region: &Region) -> GameState {
    let mut next = state.clone();
    for p in &mut next.players {
        p.frozen = classify(p.pos.xz(), region) == Zone::Ldr;
    }
    next.mdr = region.clone();
    next
}

/// Players simulated in full detail.
pub fn unfrozen_count(state: &GameState) -> usize {
    state.players.iter().filter(|p| !p.frozen).count()
}
