//! Authoritative fixed-period server tick.
//!
//! Each client sends one input batch per tick, tagged with the tick index as its
//! sequence number. At the end of the window for tick `n` every buffered batch up
//! to `n` is released and anything still missing is declared lost; a batch that
//! shows up later is refused. Players owned by a client whose batch is missing are
//! filled in by the predictor.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::jitter::{Admission, JitterBuffer};
use super::latency::LatencyEstimator;
use super::packet::{NodeId, Packet};
use crate::error::{Error, Result};
use crate::game::{apply_inputs, settle, Command, GameRules, GameState, InputEvent};
use crate::grid::{self, GridSpec};
use crate::kinematics::{BallState, PlayerState, Vec3};
use crate::predictor::{dr_baseline, predict_state, BallGuard, StatePair};

pub type InputBatch = Vec<InputEvent>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorMode {
    #[default]
    Grid,
    DrBaseline,
    /// Missing players hold their last position.
    None,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub rules: GameRules,
    pub mode: PredictorMode,
    pub guard: BallGuard,
    /// Fixed latency rate in ms; overrides the RTT estimate.
    pub pinned_latency: Option<f64>,
    /// Latency rate used until the first RTT sample.
    pub initial_latency: f64,
    pub clients: u32,
    /// Player id to owning client id.
    pub owners: BTreeMap<u32, u32>,
}

impl ServerConfig {
    /// Players dealt round-robin: player `p` belongs to client `(p - 1) % clients + 1`.
    pub fn round_robin(players: u32, clients: u32) -> BTreeMap<u32, u32> {
        if clients == 0 {
            return BTreeMap::new();
        }
        (1..=players).map(|p| (p, (p - 1) % clients + 1)).collect()
    }
}

/// What one client is told after a tick: the detailed region plus its own players.
#[derive(Debug, Clone, PartialEq)]
pub struct ScopedUpdate {
    pub client: u32,
    pub tick: u64,
    pub players: Vec<PlayerState>,
    pub ball: BallState,
}

#[derive(Debug, Clone)]
pub struct TickReport {
    pub state: GameState,
    /// Grid the tick was computed on.
    pub spec: GridSpec,
    pub latency_ms: f64,
    pub repartitioned: bool,
    pub predicted: bool,
    pub predicted_players: Vec<u32>,
    pub predicted_ball: bool,
    /// Predictor output before it was merged into the committed state.
    pub raw_prediction: Option<GameState>,
    pub missing_clients: Vec<u32>,
    /// Batches refused since the previous tick because their window had closed.
    pub late_inputs: u64,
    /// Some players had no input and no prediction, so they held position.
    pub stalled: bool,
    pub rejected: Vec<InputEvent>,
    pub updates: Vec<ScopedUpdate>,
}

#[derive(Debug, Clone)]
pub struct Server {
    cfg: ServerConfig,
    spec: GridSpec,
    current: GameState,
    previous: Option<GameState>,
    buffers: BTreeMap<u32, JitterBuffer<InputBatch>>,
    estimator: LatencyEstimator,
    late: u64,
    last_tau: BTreeMap<u32, u8>,
}

impl Server {
    pub fn new(cfg: ServerConfig, spec: GridSpec, initial: GameState) -> Result<Self> {
        if cfg.initial_latency.is_nan() || cfg.initial_latency <= 0.0 {
            return Err(Error::invalid("initial_latency", "must be > 0"));
        }
        if let Some(l) = cfg.pinned_latency {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::invalid("pinned_latency", "must be > 0"));
            }
        }
        for (player, client) in &cfg.owners {
            if initial.player(*player).is_none() {
                return Err(Error::MissingEntity(*player));
            }
            if !(1..=cfg.clients).contains(client) {
                return Err(Error::Config(format!(
                    "player {player} owned by unknown client {client}"
                )));
            }
        }
        let next = initial.index + 1;
        let buffers = (1..=cfg.clients)
            .map(|c| (c, JitterBuffer::new(next)))
            .collect();
        Ok(Self {
            cfg,
            spec,
            current: initial,
            previous: None,
            buffers,
            estimator: LatencyEstimator::default(),
            late: 0,
            last_tau: BTreeMap::new(),
        })
    }

    pub fn state(&self) -> &GameState {
        &self.current
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn config(&self) -> &ServerConfig {
        &self.cfg
    }

    pub fn estimator(&self) -> &LatencyEstimator {
        &self.estimator
    }

    /// Latency rate the next tick will partition with.
    pub fn latency_rate(&self) -> f64 {
        self.cfg
            .pinned_latency
            .or_else(|| self.estimator.estimate().ok())
            .unwrap_or(self.cfg.initial_latency)
    }

    pub fn record_rtt(&mut self, rtt_ms: f64) {
        self.estimator.record(rtt_ms);
    }

    /// Accepts a client's input batch. Batches for ticks already committed are late
    /// and never touch state.
    pub fn receive(&mut self, packet: Packet<InputBatch>, at: f64) -> Admission {
        let NodeId::Client(client) = packet.sender else {
            warn!(sender = %packet.sender, "input batch from a non-client dropped");
            return Admission::Late;
        };
        let Some(buf) = self.buffers.get_mut(&client) else {
            warn!(client, "input batch from unknown client dropped");
            return Admission::Late;
        };
        let seq = packet.seq;
        let verdict = buf.push(packet, at);
        if verdict == Admission::Late {
            debug!(client, seq, at, "late input counted as lost");
            self.late += 1;
        }
        verdict
    }

    /// Commits the next tick at simulated time `now`.
    pub fn tick(&mut self, now: f64) -> Result<TickReport> {
        let rules = self.cfg.rules.clone();
        let n = self.current.index + 1;

        let latency_ms = self.latency_rate();
        let candidate = self.spec.with_latency(latency_ms)?;
        let repartitioned = self.spec.needs_repartition(candidate.interval);
        if repartitioned {
            let (cur, spec) =
                grid::repartition(&self.current, candidate.rho, &self.spec, rules.mu)?;
            if let Some(prev) = &self.previous {
                self.previous =
                    Some(grid::repartition(prev, candidate.rho, &self.spec, rules.mu)?.0);
            }
            debug!(
                tick = n,
                from = self.spec.interval,
                to = spec.interval,
                "re-partitioned"
            );
            self.current = cur;
            self.spec = spec;
        }

        let mut inputs = Vec::new();
        let mut missing = Vec::new();
        for (&client, buf) in &mut self.buffers {
            let mut got = false;
            for r in buf.release_through(n, now) {
                if r.packet.seq != n {
                    continue;
                }
                got = true;
                let mut tau = 0;
                for ev in r.packet.payload {
                    if self.cfg.owners.get(&ev.player) != Some(&client) {
                        warn!(
                            client,
                            player = ev.player,
                            "input for a player the client does not own"
                        );
                        continue;
                    }
                    if let Command::Kick(k) = ev.command {
                        tau = k.tau_delta.max(0) as u8;
                    }
                    inputs.push(ev);
                }
                self.last_tau.insert(client, tau.min(2));
            }
            if !got {
                missing.push(client);
            }
        }
        inputs.sort_by_key(|e| e.player);

        let missing_set: BTreeSet<u32> = missing.iter().copied().collect();
        let owner_missing = |player: u32| {
            self.cfg
                .owners
                .get(&player)
                .is_some_and(|c| missing_set.contains(c))
        };
        let missing_players: Vec<u32> = self
            .current
            .players
            .iter()
            .filter(|p| !p.frozen && owner_missing(p.id))
            .map(|p| p.id)
            .collect();
        let ball_owner = self.current.ball.holder;
        let ball_missing = ball_owner.is_some_and(&owner_missing);

        let raw_prediction = if missing_players.is_empty() && !ball_missing {
            None
        } else {
            self.predict(ball_owner)
        };
        let (draft, rejected) = apply_inputs(&self.current, &inputs, &self.spec, &rules);
        let mut draft = draft;
        if let Some(pred) = &raw_prediction {
            for id in &missing_players {
                let pos = pred.player(*id).map(|p| p.pos);
                if let (Some(pos), Some(p)) = (pos, draft.player_mut(*id)) {
                    p.pos = pos;
                }
            }
            if ball_missing {
                draft.ball.pos = pred.ball.pos;
            }
        }
        let mut next = settle(&draft, &self.spec, &rules)?;
        next.index = n;
        next.time = rules.time_of(n);

        let predicted = raw_prediction.is_some();
        let stalled = !predicted && (!missing_players.is_empty() || ball_missing);
        let updates = (1..=self.cfg.clients)
            .map(|client| ScopedUpdate {
                client,
                tick: n,
                players: next
                    .players
                    .iter()
                    .filter(|p| !p.frozen || self.cfg.owners.get(&p.id) == Some(&client))
                    .cloned()
                    .collect(),
                ball: next.ball.clone(),
            })
            .collect();

        let report = TickReport {
            state: next.clone(),
            spec: self.spec.clone(),
            latency_ms,
            repartitioned,
            predicted,
            predicted_players: if predicted {
                missing_players
            } else {
                Vec::new()
            },
            predicted_ball: predicted && ball_missing,
            raw_prediction,
            missing_clients: missing,
            late_inputs: std::mem::take(&mut self.late),
            stalled,
            rejected,
            updates,
        };
        self.previous = Some(std::mem::replace(&mut self.current, next));
        Ok(report)
    }

    fn predict(&self, holder: Option<u32>) -> Option<GameState> {
        let prev = self.previous.as_ref()?;
        if self.cfg.mode == PredictorMode::None {
            return None;
        }
        let pair = match StatePair::new(prev, &self.current) {
            Ok(p) => p,
            Err(e) => {
                warn!(error = %e, "cannot pair states for prediction");
                return None;
            }
        };
        let rules = &self.cfg.rules;
        let out = match self.cfg.mode {
            PredictorMode::Grid => {
                let tau = holder
                    .and_then(|h| self.cfg.owners.get(&h))
                    .and_then(|c| self.last_tau.get(c))
                    .copied()
                    .unwrap_or(0);
                predict_state(&pair, &self.spec, rules, self.cfg.guard, tau)
            }
            PredictorMode::DrBaseline => {
                dr_baseline(&pair, rules.tick_seconds(), &self.spec, rules)
            }
            PredictorMode::None => return None,
        };
        match out {
            Ok(s) => Some(s),
            Err(e) => {
                warn!(error = %e, "prediction failed; missing players hold position");
                None
            }
        }
    }
}

/// Position of every entity of `state`, players by id then the ball.
pub fn positions(state: &GameState) -> Vec<Vec3> {
    state
        .players
        .iter()
        .map(|p| p.pos)
        .chain(std::iter::once(state.ball.pos))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{default_state, step, GameSetup};
    use crate::kinematics::{Axis, Direction, GameKind, HeightModel};

    const P: f64 = 100.0;

    fn world(clients: u32, players: u32) -> (Server, GridSpec, GameRules) {
        let spec = GridSpec::new(100.0, 1, 400.0, 10.0, 10, 10.0).unwrap();
        let rules = GameRules::new(
            100,
            HeightModel::new(10.0, 4.0, GameKind::Football).unwrap(),
            P,
        )
        .unwrap();
        let setup = GameSetup {
            players,
            player_starts: vec![(1.0, 1.0), (1.0, 2.0)],
            ..Default::default()
        };
        let s0 = default_state(&setup, &spec, &rules).unwrap();
        let cfg = ServerConfig {
            rules: rules.clone(),
            mode: PredictorMode::Grid,
            guard: BallGuard::Inclusive,
            pinned_latency: Some(400.0),
            initial_latency: 10.0,
            clients,
            owners: ServerConfig::round_robin(players, clients),
        };
        (Server::new(cfg, spec.clone(), s0).unwrap(), spec, rules)
    }

    fn mv(player: u32, axis: Axis, tick: u64) -> InputEvent {
        InputEvent::new(
            player,
            Command::Move {
                axis,
                direction: Direction::Pos,
            },
            (tick - 1) as f64 * P,
        )
    }

    fn batch(client: u32, tick: u64, events: Vec<InputEvent>) -> Packet<InputBatch> {
        Packet::new(tick, (tick - 1) as f64 * P, NodeId::Client(client), events)
    }

    #[test]
    fn on_time_inputs_match_lossless_step() {
        let (mut server, spec, rules) = world(2, 2);
        let mut shadow = server.state().clone();
        for t in 1..=5u64 {
            let inputs = vec![mv(1, Axis::X, t), mv(2, Axis::Z, t)];
            server.receive(batch(1, t, vec![inputs[0].clone()]), t as f64 * P - 10.0);
            server.receive(batch(2, t, vec![inputs[1].clone()]), t as f64 * P - 10.0);
            let report = server.tick(t as f64 * P).unwrap();
            shadow = step(&shadow, &inputs, &spec, &rules).unwrap().state;
            assert!(!report.predicted);
            assert_eq!(report.state, shadow);
        }
    }

    #[test]
    fn late_input_is_lost_and_predicted() {
        let (mut server, spec, rules) = world(1, 2);
        let mut shadow = server.state().clone();
        for t in 1..=4u64 {
            let inputs = vec![mv(1, Axis::X, t), mv(2, Axis::Z, t)];
            shadow = step(&shadow, &inputs, &spec, &rules).unwrap().state;
            if t != 3 {
                assert_eq!(
                    server.receive(batch(1, t, inputs), t as f64 * P - 1.0),
                    Admission::Buffered
                );
            }
            let report = server.tick(t as f64 * P).unwrap();
            if t == 3 {
                assert!(report.predicted);
                assert_eq!(report.missing_clients, vec![1]);
                assert_eq!(report.predicted_players, vec![1, 2]);
                let committed = report.state.clone();
                let late = vec![mv(1, Axis::Z, 3), mv(2, Axis::X, 3)];
                assert_eq!(
                    server.receive(batch(1, 3, late), 3.0 * P + 1.0),
                    Admission::Late
                );
                assert_eq!(server.state(), &committed);
            }
            assert_eq!(report.state, shadow, "tick {t}");
        }
    }

    #[test]
    fn zero_clients_idle_forward() {
        let (mut server, ..) = world(0, 2);
        let before = server.state().clone();
        let r = server.tick(P).unwrap();
        assert_eq!(r.state.index, 1);
        assert_eq!(r.state.players, before.players);
        assert!(!r.predicted && !r.stalled);
    }

    #[test]
    fn first_tick_without_history_stalls() {
        let (mut server, ..) = world(1, 2);
        let before = server.state().clone();
        let r = server.tick(P).unwrap();
        assert!(r.stalled && !r.predicted);
        assert_eq!(r.state.players, before.players);
    }

    #[test]
    fn foreign_player_inputs_ignored() {
        let (mut server, ..) = world(2, 2);
        let before = server.state().player(2).unwrap().pos;
        server.receive(batch(1, 1, vec![mv(2, Axis::X, 1)]), 1.0);
        server.receive(batch(2, 1, vec![]), 1.0);
        let r = server.tick(P).unwrap();
        assert_eq!(r.state.player(2).unwrap().pos, before);
    }

    #[test]
    fn updates_are_scoped_per_client() {
        let (mut server, ..) = world(2, 2);
        let r = server.tick(P).unwrap();
        assert_eq!(r.updates.len(), 2);
        assert!(r.updates.iter().all(|u| u.tick == 1));
    }
}
