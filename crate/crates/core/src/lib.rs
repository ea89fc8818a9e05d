//! Lattice-based latency compensation for simultaneous-movement multiplayer games.
//!
//! The playing field is partitioned into a square lattice whose spacing shrinks as
//! the measured round-trip latency grows. Entities only ever occupy lattice points,
//! which lets a lost game state be rebuilt from the two states before it without
//! tracking velocities. The crate is organised bottom-up:
//!
//! - [`grid`]: partitioning parameter, point interval, lattice and re-partitioning.
//! - [`region`]: the detailed region around the ball and freezing of everything else.
//! - [`kinematics`]: legal moves for players and the ball, jump ladder, kick strength.
//! - [`predictor`]: reconstruction of a missing state, plus a dead-reckoning baseline.
//! - [`game`]: game state, default setup, the committed step function and snapshots.
//! - [`net`]: seeded discrete-event transport, jitter buffer, topologies, server tick.
//! - [`harness`]: scenario configs, the simulation runner, sweeps, comparisons and fixtures.

pub mod error;
pub mod game;
pub mod grid;
pub mod harness;
pub mod kinematics;
pub mod net;
pub mod predictor;
pub mod region;

pub use error::{Error, Result};
pub use game::{GameRules, GameState, InputEvent};
pub use grid::GridSpec;
pub use region::Region;
