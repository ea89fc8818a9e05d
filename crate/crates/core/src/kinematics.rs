//! Legal moves on the lattice.
//!
//! Players step one interval along a single axis per tick; a specially talented
//! player carrying the ball steps `phi` intervals. Heights live on a short ladder
//! of `I_y` steps above the common player height.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xz(&self) -> (f64, f64) {
        (self.x, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Neg,
    Pos,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Neg => -1,
            Direction::Pos => 1,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Neg => Direction::Pos,
            Direction::Pos => Direction::Neg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    #[default]
    Football,
    Hockey,
    Basketball,
}

impl GameKind {
    /// Highest ladder rung a player can jump to.
    pub fn jump_levels(self) -> u8 {
        match self {
            GameKind::Football | GameKind::Hockey => 1,
            GameKind::Basketball => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Talent {
    #[default]
    Ordinary,
    /// Combines `phi` intervals per step while holding the ball; `phi = 3` is world class.
    Special { phi: u8 },
}

impl Talent {
    pub fn special(phi: u8) -> Result<Self> {
        match phi {
            2 | 3 => Ok(Talent::Special { phi }),
            _ => Err(Error::invalid("phi", format!("must be 2 or 3, got {phi}"))),
        }
    }

    pub fn phi(self) -> u8 {
        match self {
            Talent::Ordinary => 1,
            Talent::Special { phi } => phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub id: u32,
    pub pos: Vec3,
    pub talent: Talent,
    pub has_ball: bool,
    pub frozen: bool,
}

impl PlayerState {
    /// Lattice points covered by one step of this player.
    pub fn stride(&self) -> i64 {
        if self.has_ball {
            i64::from(self.talent.phi())
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub pos: Vec3,
    /// Kick strength, `0..=2`.
    pub tau: u8,
    pub holder: Option<u32>,
}

/// The y-axis model shared by every entity: one player height and a ladder of
/// `I_y = (Y_max - height) / 3` steps above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightModel {
    pub player_height: f64,
    pub i_y: f64,
    pub y_max: f64,
    pub kind: GameKind,
}

impl HeightModel {
    pub fn new(y_max: f64, player_height: f64, kind: GameKind) -> Result<Self> {
        Ok(Self {
            player_height,
            i_y: compute_iy(y_max, player_height)?,
            y_max,
            kind,
        })
    }

    pub fn rung(&self, level: u8) -> f64 {
        self.player_height + f64::from(level) * self.i_y
    }

    /// Nearest ladder level of `y`, clamped to `0..=max`.
    pub fn level_of(&self, y: f64, max: u8) -> u8 {
        let l = ((y - self.player_height) / self.i_y).round();
        l.clamp(0.0, f64::from(max)) as u8
    }

    /// Ball ceiling, two rungs above the player height.
    pub fn ball_ceiling(&self) -> f64 {
        self.rung(2)
    }
}

/// `(Y_max - Height_player) / 3`.
pub fn compute_iy(y_max: f64, player_height: f64) -> Result<f64> {
    if !(player_height.is_finite() && player_height > 0.0) {
        return Err(Error::invalid("player_height", "must be finite and > 0"));
    }
    if !(y_max.is_finite() && y_max > player_height) {
        return Err(Error::invalid(
            "y_max",
            format!("must exceed player height {player_height}, got {y_max}"),
        ));
    }
    Ok((y_max - player_height) / 3.0)
}

/// Where `player` may be after one tick: stay, or one stride along a single axis.
/// Candidates off the field are dropped. Order: stay, -x, +x, -z, +z.
pub fn player_move_candidates(player: &PlayerState, spec: &GridSpec) -> Vec<(f64, f64)> {
    let i = spec.interval;
    let stride = player.stride();
    let (kx, kz) = (
        grid::index_of(player.pos.x, i),
        grid::index_of(player.pos.z, i),
    );
    let (mx, mz) = (spec.max_index_x(), spec.max_index_z());
    let mut out = vec![(player.pos.x, player.pos.z)];
    for (dx, dz) in [(-stride, 0), (stride, 0), (0, -stride), (0, stride)] {
        let (nx, nz) = (kx + dx, kz + dz);
        if (0..=mx).contains(&nx) && (0..=mz).contains(&nz) {
            let x = if dx == 0 {
                player.pos.x
            } else {
                grid::coord(nx, i)
            };
            let z = if dz == 0 {
                player.pos.z
            } else {
                grid::coord(nz, i)
            };
            out.push((x, z));
        }
    }
    out
}

/// Reachable heights from `y`. On the ground: the ground plus every rung up to the
/// game's jump cap. In the air: only the next rung down.
pub fn jump_targets(y: f64, model: &HeightModel) -> Vec<f64> {
    let cap = model.kind.jump_levels();
    let level = model.level_of(y, cap);
    if level == 0 {
        (0..=cap).map(|l| model.rung(l)).collect()
    } else {
        vec![model.rung(level - 1)]
    }
}

/// `tau + delta` clamped to `0..=2`.
pub fn update_tau(tau: u8, delta: i8) -> u8 {
    (i16::from(tau) + i16::from(delta)).clamp(0, 2) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kick {
    pub axis: Axis,
    pub direction: Direction,
    pub tau_delta: i8,
}

/// Moves the ball `strides` intervals along one axis and updates its height from the
/// new kick strength. Fails if the ball would leave the field.
pub fn ball_move(
    ball: &BallState,
    kick: Kick,
    strides: i64,
    spec: &GridSpec,
    model: &HeightModel,
) -> Result<BallState> {
    let i = spec.interval;
    let step = kick.direction.sign() * strides;
    let mut next = ball.clone();
    match kick.axis {
        Axis::X => {
            let k = grid::index_of(ball.pos.x, i) + step;
            if !(0..=spec.max_index_x()).contains(&k) {
                return Err(Error::MoveRejected);
            }
            next.pos.x = grid::coord(k, i);
        }
        Axis::Z => {
            let k = grid::index_of(ball.pos.z, i) + step;
            if !(0..=spec.max_index_z()).contains(&k) {
                return Err(Error::MoveRejected);
            }
            next.pos.z = grid::coord(k, i);
        }
    }
    if kick.tau_delta != 0 {
        next.tau = update_tau(ball.tau, kick.tau_delta);
        next.pos.y = model.rung(next.tau).clamp(0.0, spec.y_max);
    }
    Ok(next)
}
