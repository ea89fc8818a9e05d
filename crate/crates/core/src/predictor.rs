//! Reconstruction of a missing game state from the two states before it.
//!
//! Entities live on the lattice, so the last displacement of each one is a whole
//! number of lattice steps. A moving entity is assumed to keep going one step in
//! the same direction, a stationary one stays, and a player who just jumped comes
//! back down. No velocity or acceleration is stored anywhere: the two previous
//! positions are the whole input.
//!
//! Displacement thresholds (`|dx| >= I`, `dy >= I_y`, ...) are evaluated in
//! rounded lattice steps, which is exact for on-lattice positions and immune to
//! float noise in coordinate differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameRules, GameState};
use crate::grid::{self, GridSpec};
use crate::kinematics::Vec3;
use crate::region::{apply_freeze, compute_mdr};

pub use crate::kinematics::update_tau;

/// Which displacement arms the ball's x/z extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallGuard {
    /// `|dx| < I`: only a zero horizontal step arms the branch.
    Strict,
    /// `|dx| <= I`: a single lattice step arms the branch.
    #[default]
    Inclusive,
}

/// `S_{n-2}` and `S_{n-1}`, aligned by player id.
#[derive(Debug, Clone, Copy)]
pub struct StatePair<'a> {
    pub prev2: &'a GameState,
    pub prev1: &'a GameState,
}

impl<'a> StatePair<'a> {
    pub fn new(prev2: &'a GameState, prev1: &'a GameState) -> Result<Self> {
        if !(prev2.time >= 0.0 && prev1.time > prev2.time) {
            return Err(Error::InconsistentPair(format!(
                "times must satisfy {} > {} >= 0",
                prev1.time, prev2.time
            )));
        }
        if prev1.interval != prev2.interval {
            return Err(Error::InconsistentPair(format!(
                "intervals differ: {} vs {}",
                prev2.interval, prev1.interval
            )));
        }
        Ok(Self { prev2, prev1 })
    }

    pub fn interval(&self) -> f64 {
        self.prev1.interval
    }
}

fn ladder_delta(a: f64, b: f64, i_y: f64) -> i64 {
    ((a - b) / i_y).round() as i64
}

/// Next position of player `id`.
pub fn predict_player(id: u32, pair: &StatePair<'_>, spec: &GridSpec, i_y: f64) -> Result<Vec3> {
    let p2 = pair.prev2.player(id).ok_or(Error::MissingEntity(id))?.pos;
    let p1 = pair.prev1.player(id).ok_or(Error::MissingEntity(id))?.pos;
    let i = pair.interval();
    let dx = grid::lattice_delta(p1.x, p2.x, i);
    let dz = grid::lattice_delta(p1.z, p2.z, i);
    let dy = ladder_delta(p1.y, p2.y, i_y);

    let mut next = p1;
    match (dx, dy, dz) {
        (0, 0, 0) => {}
        (dx, 0, 0) => {
            let k = grid::index_of(p1.x, i) + dx.signum();
            next.x = grid::coord(k.clamp(0, (spec.max_index_x() - 1).max(0)), i);
        }
        (0, 0, dz) => {
            let k = grid::index_of(p1.z, i) + dz.signum();
            next.z = grid::coord(k.clamp(0, (spec.max_index_z() - 1).max(0)), i);
        }
        (0, dy, 0) if dy >= 1 => next.y = p2.y,
        // came down, or several axes at once: keep the last known position
        _ => {}
    }
    Ok(next)
}

/// Next ball position. `tau` is the kick strength carried into the lost state.
pub fn predict_ball(
    pair: &StatePair<'_>,
    spec: &GridSpec,
    i_y: f64,
    tau: u8,
    guard: BallGuard,
) -> Result<Vec3> {
    let b2 = pair.prev2.ball.pos;
    let b1 = pair.prev1.ball.pos;
    if b1 == b2 {
        return Ok(b1);
    }
    let i = pair.interval();
    let dx = grid::lattice_delta(b1.x, b2.x, i);
    let dz = grid::lattice_delta(b1.z, b2.z, i);
    let armed = |d: i64| match guard {
        BallGuard::Strict => d == 0,
        BallGuard::Inclusive => d.abs() <= 1,
    };
    let lifted = (b1.y + f64::from(tau.min(2)) * i_y).clamp(0.0, spec.y_max);

    let mut next = b1;
    if armed(dx) && dz == 0 {
        let k = grid::index_of(b1.x, i) + dx.signum();
        next.x = grid::coord(k.clamp(0, spec.max_index_x()), i);
        next.y = lifted;
    } else if dx == 0 && armed(dz) {
        let k = grid::index_of(b1.z, i) + dz.signum();
        next.z = grid::coord(k.clamp(0, spec.max_index_z()), i);
        next.y = lifted;
    } else if dx != 0 && dz != 0 {
        return Err(Error::SingleAxisViolation);
    }
    Ok(next)
}

/// Predicted `S_n = {I_{n-1}, P_n, B_n}`: the interval is inherited, unfrozen players
/// and the ball are extrapolated, frozen players are copied, and the region is rebuilt.
pub fn predict_state(
    pair: &StatePair<'_>,
    spec: &GridSpec,
    rules: &GameRules,
    guard: BallGuard,
    tau: u8,
) -> Result<GameState> {
    let i_y = rules.heights.i_y;
    let mut next = pair.prev1.clone();
    for p in &mut next.players {
        if !p.frozen {
            p.pos = predict_player(p.id, pair, spec, i_y)?;
        }
    }
    next.ball.pos = predict_ball(pair, spec, i_y, tau, guard)?;
    next.ball.tau = rules.heights.level_of(next.ball.pos.y, 2);
    finish(next, pair, spec, rules)
}

/// Dead-reckoning comparison baseline: linear extrapolation of each entity by
/// `dt` seconds, clamped to the field but not to the lattice.
pub fn dr_baseline(
    pair: &StatePair<'_>,
    dt: f64,
    spec: &GridSpec,
    rules: &GameRules,
) -> Result<GameState> {
    let ratio = dt / (pair.prev1.time - pair.prev2.time);
    let extrapolate = |a: Vec3, b: Vec3| Vec3 {
        x: (b.x + (b.x - a.x) * ratio).clamp(0.0, spec.x_max),
        y: (b.y + (b.y - a.y) * ratio).clamp(0.0, spec.y_max),
        z: (b.z + (b.z - a.z) * ratio).clamp(0.0, spec.z_max),
    };
    let mut next = pair.prev1.clone();
    for p in &mut next.players {
        if p.frozen {
            continue;
        }
        let before = pair.prev2.player(p.id).ok_or(Error::MissingEntity(p.id))?;
        p.pos = extrapolate(before.pos, p.pos);
    }
    next.ball.pos = extrapolate(pair.prev2.ball.pos, pair.prev1.ball.pos);
    finish(next, pair, spec, rules)
}

fn finish(
    mut next: GameState,
    pair: &StatePair<'_>,
    spec: &GridSpec,
    rules: &GameRules,
) -> Result<GameState> {
    let region = compute_mdr(next.ball.pos.xz(), rules.mu, pair.interval(), spec.bounds())?;
    next = apply_freeze(&next, &region);
    next.index = pair.prev1.index + 1;
    next.time = rules.time_of(next.index);
    Ok(next)
}

/// Distance between two positions in lattice steps (`|dx|/I + |dz|/I + |dy|/I_y`).
/// Anything below `1e-9` steps is float noise and reported as zero.
pub fn entity_error(a: &Vec3, b: &Vec3, interval: f64, i_y: f64) -> f64 {
    let e = (a.x - b.x).abs() / interval + (a.z - b.z).abs() / interval + (a.y - b.y).abs() / i_y;
    if e < 1e-9 {
        0.0
    } else {
        e
    }
}
