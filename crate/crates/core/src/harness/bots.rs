//! Scripted players. Bots read the ground-truth state and emit one command per
//! player per tick; randomness comes from their own seeded stream.

use std::collections::BTreeMap;

use super::config::{BotKind, BotSection};
use crate::game::{Command, GameState, InputEvent};
use crate::grid::{self, GridSpec};
use crate::kinematics::{player_move_candidates, Axis, Direction, Kick, PlayerState};
use crate::net::SeededStream;

const HEADINGS: [(Axis, Direction); 4] = [
    (Axis::X, Direction::Pos),
    (Axis::Z, Direction::Pos),
    (Axis::X, Direction::Neg),
    (Axis::Z, Direction::Neg),
];

#[derive(Debug, Clone)]
pub struct Bots {
    kind: BotKind,
    reverse_every: u64,
    kick_prob: f64,
    rng: SeededStream,
    heading: BTreeMap<u32, (Axis, Direction)>,
}

impl Bots {
    pub fn new(section: &BotSection, seed: u64) -> Self {
        Self {
            kind: section.kind,
            reverse_every: section.reverse_every,
            kick_prob: section.kick_prob,
            rng: SeededStream::new(seed),
            heading: BTreeMap::new(),
        }
    }

    /// Commands for tick `tick`, issued at `issued_at` ms.
    pub fn decide(
        &mut self,
        state: &GameState,
        spec: &GridSpec,
        tick: u64,
        issued_at: f64,
    ) -> Vec<InputEvent> {
        state
            .players
            .iter()
            .map(|p| {
                let command = match self.kind {
                    BotKind::Stationary => Command::Idle,
                    BotKind::Linear => self.linear(p, spec, false),
                    BotKind::Reverse => {
                        let flip = tick > 1 && tick.is_multiple_of(self.reverse_every);
                        self.linear(p, spec, flip)
                    }
                    BotKind::Chase => self.chase(p, state, spec),
                };
                InputEvent::new(p.id, command, issued_at)
            })
            .collect()
    }

    fn linear(&mut self, p: &PlayerState, spec: &GridSpec, flip: bool) -> Command {
        let (axis, mut direction) = *self
            .heading
            .entry(p.id)
            .or_insert(HEADINGS[(p.id as usize + 3) % 4]);
        if flip {
            direction = direction.reversed();
        }
        let i = spec.interval;
        let (k, max) = match axis {
            Axis::X => (grid::index_of(p.pos.x, i), spec.max_index_x()),
            Axis::Z => (grid::index_of(p.pos.z, i), spec.max_index_z()),
        };
        let next = k + direction.sign() * p.stride();
        if !(0..=(max - 1).max(0)).contains(&next) {
            direction = direction.reversed();
        }
        self.heading.insert(p.id, (axis, direction));
        Command::Move { axis, direction }
    }

    fn chase(&mut self, p: &PlayerState, state: &GameState, spec: &GridSpec) -> Command {
        let i = spec.interval;
        if p.has_ball {
            if self.rng.unit() < self.kick_prob {
                let (axis, direction) = HEADINGS[self.rng.below(4) as usize];
                let tau_delta = self.rng.below(2) as i8;
                return Command::Kick(Kick {
                    axis,
                    direction,
                    tau_delta,
                });
            }
            let options = player_move_candidates(p, spec);
            let (x, z) = options[1 + self.rng.below(options.len() as u32 - 1) as usize];
            let axis = if x != p.pos.x { Axis::X } else { Axis::Z };
            let ahead = match axis {
                Axis::X => x > p.pos.x,
                Axis::Z => z > p.pos.z,
            };
            let direction = if ahead {
                Direction::Pos
            } else {
                Direction::Neg
            };
            return Command::Move { axis, direction };
        }
        let dx = grid::lattice_delta(state.ball.pos.x, p.pos.x, i);
        let dz = grid::lattice_delta(state.ball.pos.z, p.pos.z, i);
        if dx == 0 && dz == 0 {
            return Command::Idle;
        }
        let (axis, d) = if dx.abs() >= dz.abs() {
            (Axis::X, dx)
        } else {
            (Axis::Z, dz)
        };
        let direction = if d > 0 {
            Direction::Pos
        } else {
            Direction::Neg
        };
        Command::Move { axis, direction }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{default_state, step, GameRules, GameSetup};
    use crate::kinematics::{GameKind, HeightModel};

    fn world(kind: BotKind) -> (Bots, GameState, GridSpec, GameRules) {
        let spec = GridSpec::new(100.0, 1, 100.0, 10.0, 10, 10.0).unwrap();
        let rules = GameRules::new(
            20,
            HeightModel::new(10.0, 4.0, GameKind::Football).unwrap(),
            100.0,
        )
        .unwrap();
        let setup = GameSetup {
            players: 4,
            player_starts: vec![(5.0, 5.0)],
            ..Default::default()
        };
        let s = default_state(&setup, &spec, &rules).unwrap();
        let section = BotSection {
            kind,
            ..Default::default()
        };
        (Bots::new(&section, 11), s, spec, rules)
    }

    #[test]
    fn linear_headings_cycle() {
        let (mut bots, s, spec, _) = world(BotKind::Linear);
        let cmds: Vec<Command> = bots
            .decide(&s, &spec, 1, 0.0)
            .into_iter()
            .map(|e| e.command)
            .collect();
        let want: Vec<Command> = HEADINGS
            .iter()
            .map(|&(axis, direction)| Command::Move { axis, direction })
            .collect();
        assert_eq!(cmds, want);
    }

    #[test]
    fn chase_holder_keeps_moving_and_others_close_in() {
        let (mut bots, mut s, spec, rules) = world(BotKind::Chase);
        assert_eq!(s.ball.holder, Some(1));
        let gap = |s: &GameState| {
            let p = s.player(4).unwrap();
            (p.pos.x - s.ball.pos.x).abs() + (p.pos.z - s.ball.pos.z).abs()
        };
        let start = gap(&s);
        let mut moved = 0;
        for t in 1..=30 {
            let before = s.ball.pos;
            let inputs = bots.decide(&s, &spec, t, 0.0);
            s = step(&s, &inputs, &spec, &rules).unwrap().state;
            if s.ball.pos != before {
                moved += 1;
            }
        }
        assert!(moved >= 20, "ball moved on {moved} ticks");
        assert!(gap(&s) < start);
    }

    #[test]
    fn same_seed_same_script() {
        let (mut a, s, spec, _) = world(BotKind::Chase);
        let (mut b, ..) = world(BotKind::Chase);
        for t in 1..10 {
            assert_eq!(a.decide(&s, &spec, t, 0.0), b.decide(&s, &spec, t, 0.0));
        }
    }
}
