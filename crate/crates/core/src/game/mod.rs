//! The simultaneous-movement possession game.
//!
//! A [`GameState`] is one committed snapshot `S_n`. [`step`] is the only way the
//! server advances the game without prediction; the predictor and the simulator
//! both target its output.

pub mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec};
use crate::kinematics::{
    ball_move, player_move_candidates, Axis, BallState, Direction, HeightModel, Kick, PlayerState,
    Talent, Vec3,
};
use crate::region::{apply_freeze, compute_mdr, Region, Zone};

/// Rules shared by every state of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRules {
    /// Game region constant: MDR half-width in intervals.
    pub mu: u32,
    pub heights: HeightModel,
    /// Server update period.
    pub tick_ms: f64,
}

impl GameRules {
    pub fn new(mu: u32, heights: HeightModel, tick_ms: f64) -> Result<Self> {
        if mu == 0 {
            return Err(Error::invalid("mu", "must be >= 1"));
        }
        if !(tick_ms.is_finite() && tick_ms > 0.0) {
            return Err(Error::invalid("tick_ms", "must be > 0"));
        }
        Ok(Self {
            mu,
            heights,
            tick_ms,
        })
    }

    pub fn tick_seconds(&self) -> f64 {
        self.tick_ms / 1000.0
    }

    /// Simulated time of state `index`.
    pub fn time_of(&self, index: u64) -> f64 {
        index as f64 * self.tick_seconds()
    }
}

/// Kick-off layout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GameSetup {
    /// Total player count, split into two mirrored halves.
    pub players: u32,
    pub ball_start: Option<(f64, f64)>,
    /// Explicit `(x, z)` for players `1..=len`, overriding the formation.
    pub player_starts: Vec<(f64, f64)>,
    /// Player id to `phi`.
    pub special: BTreeMap<u32, u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub index: u64,
    /// Seconds since kick-off.
    pub time: f64,
    /// Interval the positions were laid out on.
    pub interval: f64,
    /// Sorted by id.
    pub players: Vec<PlayerState>,
    pub ball: BallState,
    pub mdr: Region,
    /// Draws consumed from the input-script stream.
    pub rng_cursor: u64,
}

impl GameState {
    pub fn player(&self, id: u32) -> Option<&PlayerState> {
        self.players
            .binary_search_by_key(&id, |p| p.id)
            .ok()
            .map(|i| &self.players[i])
    }

    pub fn player_mut(&mut self, id: u32) -> Option<&mut PlayerState> {
        self.players
            .binary_search_by_key(&id, |p| p.id)
            .ok()
            .map(move |i| &mut self.players[i])
    }

    pub fn holder(&self) -> Option<&PlayerState> {
        self.ball.holder.and_then(|id| self.player(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    Move { axis: Axis, direction: Direction },
    Jump,
    Kick(Kick),
    Idle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEvent {
    pub player: u32,
    pub command: Command,
    /// Simulated ms at which the client issued the command.
    pub issued_at: f64,
}

impl InputEvent {
    pub fn new(player: u32, command: Command, issued_at: f64) -> Self {
        Self {
            player,
            command,
            issued_at,
        }
    }
}

fn same_point(a: (f64, f64), b: (f64, f64), interval: f64) -> bool {
    grid::index_of(a.0, interval) == grid::index_of(b.0, interval)
        && grid::index_of(a.1, interval) == grid::index_of(b.1, interval)
}

/// Builds `S_0`: mirrored halves, ball in the centre, MDR around the ball.
pub fn default_state(setup: &GameSetup, spec: &GridSpec, rules: &GameRules) -> Result<GameState> {
    if spec.min_points < 2 {
        return Err(Error::Config(format!(
            "min_points must be >= 2, got {}",
            spec.min_points
        )));
    }
    if setup.player_starts.len() > setup.players as usize {
        return Err(Error::Config(format!(
            "{} player starts given for {} players",
            setup.player_starts.len(),
            setup.players
        )));
    }
    for id in setup.special.keys() {
        if *id == 0 || *id > setup.players {
            return Err(Error::Config(format!("special player {id} does not exist")));
        }
    }
    let i = spec.interval;
    let w = spec.screen_width;
    let on_field = |(x, z): (f64, f64)| -> Result<(f64, f64)> {
        if !(0.0..=spec.x_max).contains(&x) || !(0.0..=spec.z_max).contains(&z) {
            return Err(Error::OutOfBounds {
                x,
                z,
                x_max: spec.x_max,
                z_max: spec.z_max,
            });
        }
        Ok((grid::snap(x, i, spec.x_max), grid::snap(z, i, spec.z_max)))
    };

    let side_a = setup.players.div_ceil(2);
    let mut players = Vec::with_capacity(setup.players as usize);
    for id in 1..=setup.players {
        let (x, z) = match setup.player_starts.get(id as usize - 1) {
            Some(p) => *p,
            None => {
                let (slot, count, x) = if id <= side_a {
                    (id, side_a, w / 4.0)
                } else {
                    (id - side_a, setup.players - side_a, 3.0 * w / 4.0)
                };
                (x, w * f64::from(slot) / f64::from(count + 1))
            }
        };
        let (x, z) = on_field((x, z))?;
        let talent = match setup.special.get(&id) {
            Some(phi) => Talent::special(*phi)?,
            None => Talent::Ordinary,
        };
        players.push(PlayerState {
            id,
            pos: Vec3::new(x, rules.heights.player_height, z),
            talent,
            has_ball: false,
            frozen: false,
        });
    }
    let (bx, bz) = on_field(setup.ball_start.unwrap_or((w / 2.0, w / 2.0)))?;
    let ball = BallState {
        pos: Vec3::new(bx, rules.heights.player_height, bz),
        tau: 0,
        holder: None,
    };
    let mdr = compute_mdr((bx, bz), rules.mu, i, spec.bounds())?;
    let draft = GameState {
        index: 0,
        time: 0.0,
        interval: i,
        players,
        ball,
        mdr,
        rng_cursor: 0,
    };
    settle(&draft, spec, rules)
}

/// Result of applying one tick of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: GameState,
    pub rejected: Vec<InputEvent>,
}

/// Applies commands to unfrozen players (ascending id, ball last) without settling
/// possession or regions. Index and time are unchanged.
pub fn apply_inputs(
    state: &GameState,
    inputs: &[InputEvent],
    spec: &GridSpec,
    rules: &GameRules,
) -> (GameState, Vec<InputEvent>) {
    let mut rejected = Vec::new();
    let mut commands: BTreeMap<u32, Command> = BTreeMap::new();
    for ev in inputs {
        if state.player(ev.player).is_none() {
            warn!(player = ev.player, "input from unknown player rejected");
            rejected.push(ev.clone());
        } else if let std::collections::btree_map::Entry::Vacant(slot) = commands.entry(ev.player) {
            slot.insert(ev.command);
        } else {
            warn!(player = ev.player, "second input in one tick rejected");
            rejected.push(ev.clone());
        }
    }

    let heights = &rules.heights;
    let cap = heights.kind.jump_levels();
    let i = spec.interval;
    let mut next = state.clone();
    let mut kick: Option<(u32, Kick, i64)> = None;
    for p in &mut next.players {
        if p.frozen {
            continue;
        }
        let level = heights.level_of(p.pos.y, cap);
        if level > 0 {
            // airborne players must come down before doing anything else
            p.pos.y = heights.rung(level - 1);
            continue;
        }
        match commands.get(&p.id).copied().unwrap_or(Command::Idle) {
            Command::Move { axis, direction } => {
                let steps = direction.sign() * p.stride();
                let target = match axis {
                    Axis::X => (grid::offset(p.pos.x, steps, i), p.pos.z),
                    Axis::Z => (p.pos.x, grid::offset(p.pos.z, steps, i)),
                };
                if player_move_candidates(p, spec).contains(&target) {
                    p.pos.x = target.0;
                    p.pos.z = target.1;
                }
            }
            Command::Jump => p.pos.y = heights.rung(cap),
            Command::Kick(k) => {
                if p.has_ball && state.ball.holder == Some(p.id) {
                    kick = Some((p.id, k, p.stride()));
                }
            }
            Command::Idle => {}
        }
    }

    if let Some(hid) = next.ball.holder {
        if let Some((kid, k, stride)) = kick.filter(|(kid, ..)| *kid == hid) {
            if let Ok(moved) = ball_move(&next.ball, k, stride, spec, heights) {
                next.ball = BallState {
                    holder: None,
                    ..moved
                };
                if let Some(p) = next.player_mut(kid) {
                    p.has_ball = false;
                }
            }
        } else if let Some(h) = next.player(hid) {
            let (x, z) = h.pos.xz();
            next.ball.pos.x = x;
            next.ball.pos.z = z;
        }
    }
    (next, rejected)
}

/// Resolves possession, normalises heights and lattice positions, rebuilds the MDR
/// around the ball and reapplies freeze flags.
pub fn settle(draft: &GameState, spec: &GridSpec, rules: &GameRules) -> Result<GameState> {
    let heights = &rules.heights;
    let cap = heights.kind.jump_levels();
    let i = spec.interval;
    let mut s = draft.clone();
    s.interval = i;
    for p in &mut s.players {
        p.pos.x = grid::snap(p.pos.x, i, spec.x_max);
        p.pos.z = grid::snap(p.pos.z, i, spec.z_max);
        p.pos.y = heights.rung(heights.level_of(p.pos.y, cap));
    }
    s.ball.pos.x = grid::snap(s.ball.pos.x, i, spec.x_max);
    s.ball.pos.z = grid::snap(s.ball.pos.z, i, spec.z_max);

    let holder = s
        .ball
        .holder
        .filter(|id| s.player(*id).is_some())
        .or_else(|| {
            s.players
                .iter()
                .find(|p| same_point(p.pos.xz(), s.ball.pos.xz(), i))
                .map(|p| p.id)
        });
    s.ball.holder = holder;
    if let Some(h) = holder.and_then(|id| s.player(id)) {
        let (x, z) = h.pos.xz();
        s.ball.pos.x = x;
        s.ball.pos.z = z;
        s.ball.tau = 0;
    } else {
        s.ball.tau = heights.level_of(s.ball.pos.y, 2);
    }
    s.ball.pos.y = heights.rung(s.ball.tau);
    for p in &mut s.players {
        p.has_ball = Some(p.id) == holder;
    }

    let region = compute_mdr(s.ball.pos.xz(), rules.mu, i, spec.bounds())?;
    Ok(apply_freeze(&s, &region))
}

/// One committed server tick.
pub fn step(
    state: &GameState,
    inputs: &[InputEvent],
    spec: &GridSpec,
    rules: &GameRules,
) -> Result<StepOutcome> {
    let (draft, rejected) = apply_inputs(state, inputs, spec, rules);
    let mut next = settle(&draft, spec, rules)?;
    next.index = state.index + 1;
    next.time = rules.time_of(next.index);
    Ok(StepOutcome {
        state: next,
        rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entity {
    Player(u32),
    Ball,
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Player(id) => write!(f, "player {id}"),
            Entity::Ball => f.write_str("ball"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    XOutOfBounds(Entity),
    ZOutOfBounds(Entity),
    YOutOfRange(Entity),
    OffLattice(Entity),
    OffLadder(Entity),
    MultipleHolders,
    HolderMismatch,
    HolderFrozen,
    FreezeMismatch(u32),
    StaleRegion,
    TauOutOfRange,
    TimeNotIncreasing,
    IntervalMismatch,
    DuplicatePlayer(u32),
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::XOutOfBounds(_) => "x out of bounds",
            Violation::ZOutOfBounds(_) => "z out of bounds",
            Violation::YOutOfRange(_) => "y out of range",
            Violation::OffLattice(_) => "off lattice",
            Violation::OffLadder(_) => "off height ladder",
            Violation::MultipleHolders => "multiple holders",
            Violation::HolderMismatch => "holder mismatch",
            Violation::HolderFrozen => "holder frozen",
            Violation::FreezeMismatch(_) => "freeze flag mismatch",
            Violation::StaleRegion => "stale region",
            Violation::TauOutOfRange => "tau out of range",
            Violation::TimeNotIncreasing => "time not increasing",
            Violation::IntervalMismatch => "interval mismatch",
            Violation::DuplicatePlayer(_) => "duplicate player",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::XOutOfBounds(e)
            | Violation::ZOutOfBounds(e)
            | Violation::YOutOfRange(e)
            | Violation::OffLattice(e)
            | Violation::OffLadder(e) => write!(f, "{} ({e})", self.name()),
            Violation::FreezeMismatch(id) | Violation::DuplicatePlayer(id) => {
                write!(f, "{} (player {id})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

/// Checks every state invariant and reports all violations found.
pub fn validate(
    state: &GameState,
    spec: &GridSpec,
    rules: &GameRules,
) -> std::result::Result<(), Vec<Violation>> {
    const EPS: f64 = 1e-9;
    let mut out = Vec::new();
    let i = state.interval;
    let heights = &rules.heights;
    let cap = heights.kind.jump_levels();

    if state.interval != spec.interval {
        out.push(Violation::IntervalMismatch);
    }
    if state.index > 0 && state.time <= 0.0 {
        out.push(Violation::TimeNotIncreasing);
    }

    let check_xz = |e: Entity, pos: &Vec3, out: &mut Vec<Violation>| {
        if !(-EPS..=spec.x_max + EPS).contains(&pos.x) {
            out.push(Violation::XOutOfBounds(e));
        }
        if !(-EPS..=spec.z_max + EPS).contains(&pos.z) {
            out.push(Violation::ZOutOfBounds(e));
        }
        if !grid::is_lattice_member(pos.x, i) || !grid::is_lattice_member(pos.z, i) {
            out.push(Violation::OffLattice(e));
        }
    };

    let mut seen = BTreeSet::new();
    for p in &state.players {
        if !seen.insert(p.id) {
            out.push(Violation::DuplicatePlayer(p.id));
        }
        let e = Entity::Player(p.id);
        check_xz(e, &p.pos, &mut out);
        let level = heights.level_of(p.pos.y, cap);
        if p.pos.y < heights.player_height - EPS || p.pos.y > heights.rung(cap) + EPS {
            out.push(Violation::YOutOfRange(e));
        } else if (p.pos.y - heights.rung(level)).abs() > EPS {
            out.push(Violation::OffLadder(e));
        }
        let zone = state.mdr.classify(p.pos.xz());
        if p.frozen != (zone == Zone::Ldr) {
            out.push(Violation::FreezeMismatch(p.id));
        }
    }
    check_xz(Entity::Ball, &state.ball.pos, &mut out);
    if state.ball.pos.y < -EPS
        || state.ball.pos.y > heights.ball_ceiling() + EPS
        || state.ball.pos.y > spec.y_max + EPS
    {
        out.push(Violation::YOutOfRange(Entity::Ball));
    }
    if state.ball.tau > 2 {
        out.push(Violation::TauOutOfRange);
    }

    let flagged: Vec<u32> = state
        .players
        .iter()
        .filter(|p| p.has_ball)
        .map(|p| p.id)
        .collect();
    if flagged.len() > 1 {
        out.push(Violation::MultipleHolders);
    }
    match (state.ball.holder, flagged.as_slice()) {
        (None, []) => {}
        (Some(h), [f]) if h == *f => {
            if state.player(h).is_some_and(|p| p.frozen) {
                out.push(Violation::HolderFrozen);
            }
        }
        _ => out.push(Violation::HolderMismatch),
    }

    let r = &state.mdr;
    if r.anchor != state.ball.pos.xz() || r.mu != rules.mu || r.interval != i {
        out.push(Violation::StaleRegion);
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::GameKind;
    use proptest::prelude::*;

    fn spec() -> GridSpec {
        GridSpec::new(100.0, 1, 100.0, 10.0, 10, 10.0).unwrap()
    }

    fn rules(mu: u32) -> GameRules {
        GameRules::new(
            mu,
            HeightModel::new(10.0, 4.0, GameKind::Football).unwrap(),
            100.0,
        )
        .unwrap()
    }

    fn setup(players: u32, starts: Vec<(f64, f64)>) -> GameSetup {
        GameSetup {
            players,
            player_starts: starts,
            ..Default::default()
        }
    }

    fn mv(player: u32, axis: Axis, direction: Direction) -> InputEvent {
        InputEvent::new(player, Command::Move { axis, direction }, 0.0)
    }

    #[test]
    fn default_state_centres_ball() {
        let s = default_state(&setup(8, vec![]), &spec(), &rules(1)).unwrap();
        assert_eq!(s.index, 0);
        assert_eq!(s.time, 0.0);
        assert_eq!(s.ball.pos, Vec3::new(5.0, 4.0, 5.0));
        assert_eq!(s.mdr.anchor, (5.0, 5.0));
        assert_eq!(s.players.len(), 8);
        assert!(validate(&s, &spec(), &rules(1)).is_ok());
        // two halves on the same rows; 2.5 and 7.5 snap toward the origin
        assert_eq!(s.players[0].pos.z, s.players[4].pos.z);
        assert_eq!((s.players[0].pos.x, s.players[4].pos.x), (2.0, 7.0));
    }

    #[test]
    fn default_state_rejects_tiny_min_points() {
        let mut sp = spec();
        sp.min_points = 1;
        assert!(matches!(
            default_state(&setup(2, vec![]), &sp, &rules(1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn idle_step_only_advances_clock() {
        let s0 = default_state(&setup(4, vec![]), &spec(), &rules(1)).unwrap();
        let s1 = step(&s0, &[], &spec(), &rules(1)).unwrap().state;
        assert_eq!(s1.index, 1);
        assert!(s1.time > s0.time);
        assert_eq!(s1.players, s0.players);
        assert_eq!(s1.ball, s0.ball);
    }

    #[test]
    fn moving_onto_ball_takes_possession() {
        // player 1 at (3,5), ball at (5,5); two +x steps
        let r = rules(5);
        let s0 = default_state(&setup(2, vec![(3.0, 5.0), (8.0, 8.0)]), &spec(), &r).unwrap();
        let s1 = step(&s0, &[mv(1, Axis::X, Direction::Pos)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s1.ball.holder, None);
        let s2 = step(&s1, &[mv(1, Axis::X, Direction::Pos)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s2.ball.holder, Some(1));
        assert!(s2.players[0].has_ball);
        // the ball now travels with its holder
        let s3 = step(&s2, &[mv(1, Axis::Z, Direction::Neg)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s3.ball.pos.xz(), (5.0, 4.0));
        assert!(validate(&s3, &spec(), &r).is_ok());
    }

    #[test]
    fn lowest_id_wins_possession_ties() {
        let r = rules(5);
        let s0 = default_state(&setup(2, vec![(4.0, 5.0), (6.0, 5.0)]), &spec(), &r).unwrap();
        let s1 = step(
            &s0,
            &[
                mv(2, Axis::X, Direction::Neg),
                mv(1, Axis::X, Direction::Pos),
            ],
            &spec(),
            &r,
        )
        .unwrap()
        .state;
        assert_eq!(s1.ball.holder, Some(1));
    }

    #[test]
    fn kick_releases_ball() {
        let r = rules(3);
        let s0 = default_state(&setup(2, vec![(5.0, 5.0), (9.0, 9.0)]), &spec(), &r).unwrap();
        assert_eq!(s0.ball.holder, Some(1));
        let kick = Command::Kick(Kick {
            axis: Axis::Z,
            direction: Direction::Pos,
            tau_delta: 1,
        });
        let s1 = step(&s0, &[InputEvent::new(1, kick, 0.0)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s1.ball.holder, None);
        assert_eq!(s1.ball.pos, Vec3::new(5.0, 6.0, 6.0));
        assert_eq!(s1.ball.tau, 1);
        assert!(!s1.players[0].has_ball);
        assert!(validate(&s1, &spec(), &r).is_ok());
    }

    #[test]
    fn special_holder_dribbles_phi_steps() {
        let r = rules(3);
        let mut st = setup(2, vec![(5.0, 5.0), (9.0, 9.0)]);
        st.special.insert(1, 3);
        let s0 = default_state(&st, &spec(), &r).unwrap();
        let s1 = step(&s0, &[mv(1, Axis::X, Direction::Neg)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s1.players[0].pos.x, 2.0);
        assert_eq!(s1.ball.pos.x, 2.0);
    }

    #[test]
    fn jump_then_mandatory_descent() {
        let r = rules(10);
        let s0 = default_state(&setup(2, vec![(1.0, 1.0), (9.0, 9.0)]), &spec(), &r).unwrap();
        let jump = InputEvent::new(1, Command::Jump, 0.0);
        let s1 = step(&s0, std::slice::from_ref(&jump), &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s1.players[0].pos.y, 6.0);
        let s2 = step(&s1, &[mv(1, Axis::X, Direction::Pos)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s2.players[0].pos, Vec3::new(1.0, 4.0, 1.0));
    }

    #[test]
    fn unknown_and_duplicate_inputs_rejected() {
        let s0 = default_state(&setup(2, vec![]), &spec(), &rules(10)).unwrap();
        let out = step(
            &s0,
            &[
                mv(99, Axis::X, Direction::Pos),
                mv(1, Axis::X, Direction::Pos),
                mv(1, Axis::X, Direction::Neg),
            ],
            &spec(),
            &rules(10),
        )
        .unwrap();
        assert_eq!(out.rejected.len(), 2);
        assert_eq!(out.state.players[0].pos.x, 3.0);
    }

    #[test]
    fn frozen_players_ignore_inputs() {
        let r = rules(1);
        let s0 = default_state(&setup(2, vec![(0.0, 0.0), (9.0, 9.0)]), &spec(), &r).unwrap();
        assert!(s0.players[0].frozen);
        let s1 = step(&s0, &[mv(1, Axis::X, Direction::Pos)], &spec(), &r)
            .unwrap()
            .state;
        assert_eq!(s1.players[0].pos, s0.players[0].pos);
    }

    #[test]
    fn fig11_state_is_valid() {
        let sp = GridSpec::new(100.0, 1, 200.0, 10.0, 10, 10.0).unwrap();
        assert_eq!(sp.interval, 0.5);
        let st = GameSetup {
            players: 2,
            ball_start: Some((6.0, 5.5)),
            player_starts: vec![(6.0, 5.5), (5.0, 4.5)],
            ..Default::default()
        };
        let s = default_state(&st, &sp, &rules(1)).unwrap();
        assert_eq!(s.ball.holder, Some(1));
        assert_eq!(validate(&s, &sp, &rules(1)), Ok(()));
    }

    #[test]
    fn validation_reports_named_violations() {
        let r = rules(1);
        let s0 = default_state(&setup(2, vec![]), &spec(), &r).unwrap();
        let mut bad = s0.clone();
        bad.players[0].pos.x = 11.0;
        let v = validate(&bad, &spec(), &r).unwrap_err();
        assert!(v.iter().any(|v| v.name() == "x out of bounds"));

        let mut two = s0;
        two.players[0].has_ball = true;
        two.players[1].has_ball = true;
        let v = validate(&two, &spec(), &r).unwrap_err();
        assert!(v.iter().any(|v| v.name() == "multiple holders"));
    }

    #[derive(Debug, Clone)]
    struct Cmd(u32, u8);

    fn to_event(c: &Cmd) -> InputEvent {
        let command = match c.1 % 7 {
            0 => Command::Idle,
            1 => Command::Jump,
            2 => Command::Kick(Kick {
                axis: Axis::X,
                direction: Direction::Neg,
                tau_delta: 1,
            }),
            n => Command::Move {
                axis: if n % 2 == 0 { Axis::X } else { Axis::Z },
                direction: if n < 5 {
                    Direction::Pos
                } else {
                    Direction::Neg
                },
            },
        };
        InputEvent::new(c.0, command, 0.0)
    }

    proptest! {
        #[test]
        fn random_play_keeps_invariants(
            mu in 1u32..4,
            ticks in proptest::collection::vec(
                proptest::collection::vec((1u32..=4, any::<u8>()).prop_map(|(p, c)| Cmd(p, c)), 0..6),
                1..25,
            )
        ) {
            let r = rules(mu);
            let sp = spec();
            let mut s = default_state(&setup(4, vec![(4.0, 5.0), (5.0, 4.0), (6.0, 6.0), (2.0, 2.0)]), &sp, &r).unwrap();
            for tick in &ticks {
                let events: Vec<_> = tick.iter().map(to_event).collect();
                let prev = s.clone();
                s = step(&s, &events, &sp, &r).unwrap().state;
                prop_assert_eq!(validate(&s, &sp, &r), Ok(()));
                for (a, b) in prev.players.iter().zip(&s.players) {
                    if a.frozen {
                        prop_assert_eq!(a.pos, b.pos);
                    }
                }
                // ball moves along at most one horizontal axis per tick
                prop_assert!(prev.ball.pos.x == s.ball.pos.x || prev.ball.pos.z == s.ball.pos.z);
            }
            // replay is bit-identical
            let mut again = default_state(&setup(4, vec![(4.0, 5.0), (5.0, 4.0), (6.0, 6.0), (2.0, 2.0)]), &sp, &r).unwrap();
            for tick in &ticks {
                let events: Vec<_> = tick.iter().map(to_event).collect();
                again = step(&again, &events, &sp, &r).unwrap().state;
            }
            prop_assert_eq!(snapshot::encode(&again), snapshot::encode(&s));
        }
    }
}
