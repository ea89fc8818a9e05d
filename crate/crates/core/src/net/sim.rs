//! Event loop that moves input batches and state updates between nodes and
//! drives the authoritative tick.
//!
//! Tick `n` covers the window `((n-1)·P, n·P]`: clients send their batch for tick
//! `n` at `(n-1)·P`, every event up to and including `n·P` is processed, and then
//! the tick commits.

use std::collections::{BTreeMap, BTreeSet};

use super::packet::{NodeId, Packet};
use super::server::{InputBatch, ScopedUpdate, Server, TickReport};
use super::topology::{Topology, TopologyKind};
use super::transport::{EventKind, Network, TrafficStats};
use crate::error::Result;

#[derive(Debug, Clone)]
pub enum Message {
    Inputs(Packet<InputBatch>),
    /// Batches collected by the secondary server, relayed to the primary.
    Forward(Vec<Packet<InputBatch>>),
    Update(ScopedUpdate),
    /// Primary to secondary: the updates for the secondary's clients.
    Snapshot {
        tick: u64,
        updates: Vec<ScopedUpdate>,
    },
    ForwardTimer {
        round: u64,
    },
}

const PRIMARY: NodeId = NodeId::Server(0);
const SECONDARY: NodeId = NodeId::Server(1);
const REFERENCE_PEER: NodeId = NodeId::Client(1);

#[derive(Debug)]
pub struct Simulation {
    net: Network<Message>,
    server: Server,
    tick_ms: f64,
    /// Send time and arrival at the authoritative node, per (client, seq).
    uplink: BTreeMap<(u32, u64), (f64, Option<f64>)>,
    tick_times: BTreeMap<u64, f64>,
    relay_pending: Vec<Packet<InputBatch>>,
}

impl Simulation {
    pub fn new(topology: Topology, server: Server, tick_ms: f64, seed: u64) -> Self {
        Self {
            net: Network::new(topology, seed),
            server,
            tick_ms,
            uplink: BTreeMap::new(),
            tick_times: BTreeMap::new(),
            relay_pending: Vec::new(),
        }
    }

    pub fn server(&self) -> &Server {
        &self.server
    }

    pub fn topology(&self) -> &Topology {
        self.net.topology()
    }

    pub fn stats(&self) -> TrafficStats {
        self.net.stats()
    }

    pub fn round_messages(&self, round: u64) -> u64 {
        self.net.sent_in_round(round)
    }

    fn kind(&self) -> TopologyKind {
        self.net.topology().kind
    }

    /// Sends each client's batch for `tick` at the start of its window. Clients in
    /// `dropped` lose every copy of this batch on the wire.
    pub fn submit_inputs(
        &mut self,
        tick: u64,
        batches: &BTreeMap<u32, InputBatch>,
        dropped: &BTreeSet<u32>,
    ) {
        let t0 = (tick - 1) as f64 * self.tick_ms;
        let clients = self.net.topology().clients;
        for c in 1..=clients {
            let payload = batches.get(&c).cloned().unwrap_or_default();
            let from = NodeId::Client(c);
            let packet = Packet::new(tick, t0, from, payload);
            let drop = dropped.contains(&c);
            self.uplink.insert((c, tick), (t0, None));
            match self.kind() {
                TopologyKind::P2p => {
                    if from == REFERENCE_PEER && !drop {
                        self.server.receive(packet.clone(), t0);
                        self.uplink.insert((c, tick), (t0, Some(t0)));
                    }
                    for peer in 1..=clients {
                        if peer != c {
                            let msg = Message::Inputs(packet.clone());
                            self.net
                                .transmit(from, NodeId::Client(peer), msg, t0, tick, drop);
                        }
                    }
                }
                TopologyKind::ClientServer | TopologyKind::NetworkServer => {
                    let home = self.net.topology().home_server(c).unwrap_or(0);
                    let msg = Message::Inputs(packet);
                    self.net
                        .transmit(from, NodeId::Server(home), msg, t0, tick, drop);
                }
            }
        }
        if self.kind() == TopologyKind::NetworkServer {
            let at = t0 + self.tick_ms / 2.0;
            self.net
                .schedule_timer(SECONDARY, at, Message::ForwardTimer { round: tick });
        }
    }

    /// Processes the window of `tick` and commits it.
    pub fn run_tick(&mut self, tick: u64) -> Result<TickReport> {
        let now = tick as f64 * self.tick_ms;
        self.pump(now);
        let report = self.server.tick(now)?;
        self.tick_times.insert(tick, now);
        self.broadcast(tick, now, &report.updates);
        Ok(report)
    }

    /// Delivers everything still in flight.
    pub fn finish(&mut self) {
        self.pump(f64::INFINITY);
    }

    fn pump(&mut self, until: f64) {
        while let Some(ev) = self.net.next_until(until) {
            let transit = ev.transit();
            let from = match ev.kind {
                EventKind::Delivery { from, .. } => Some(from),
                EventKind::Timer => None,
            };
            match (ev.to, ev.msg) {
                (to, Message::Inputs(p)) if to == PRIMARY => self.accept(p, ev.at),
                (to, Message::Inputs(p)) if to == SECONDARY => self.relay_pending.push(p),
                (to, Message::Inputs(p)) if to == REFERENCE_PEER => {
                    if from.is_some() {
                        self.server.record_rtt(2.0 * transit);
                    }
                    self.accept(p, ev.at);
                }
                // other peers apply inputs locally; only the reference peer is tracked
                (_, Message::Inputs(_)) => {}
                (_, Message::ForwardTimer { round }) => {
                    let batch = std::mem::take(&mut self.relay_pending);
                    self.net.transmit(
                        SECONDARY,
                        PRIMARY,
                        Message::Forward(batch),
                        ev.at,
                        round,
                        false,
                    );
                }
                (_, Message::Forward(batch)) => {
                    for p in batch {
                        self.accept(p, ev.at);
                    }
                }
                (_, Message::Snapshot { tick, updates }) => {
                    for u in updates {
                        let to = NodeId::Client(u.client);
                        self.net
                            .transmit(SECONDARY, to, Message::Update(u), ev.at, tick, false);
                    }
                }
                (NodeId::Client(c), Message::Update(u)) => {
                    let sent = self.uplink.remove(&(c, u.tick));
                    if let (Some((t_sent, Some(t_arrived))), Some(t_tick)) =
                        (sent, self.tick_times.get(&u.tick))
                    {
                        let rtt = (t_arrived - t_sent) + (ev.at - t_tick);
                        self.server.record_rtt(rtt);
                    }
                }
                (NodeId::Server(_), Message::Update(_)) => {}
            }
        }
    }

    fn accept(&mut self, packet: Packet<InputBatch>, at: f64) {
        if let NodeId::Client(c) = packet.sender {
            if let Some(entry) = self.uplink.get_mut(&(c, packet.seq)) {
                entry.1 = Some(at);
            }
        }
        self.server.receive(packet, at);
    }

    fn broadcast(&mut self, tick: u64, now: f64, updates: &[ScopedUpdate]) {
        match self.kind() {
            TopologyKind::P2p => {}
            TopologyKind::ClientServer => {
                for u in updates {
                    let to = NodeId::Client(u.client);
                    self.net
                        .transmit(PRIMARY, to, Message::Update(u.clone()), now, tick, false);
                }
            }
            TopologyKind::NetworkServer => {
                let topo = self.net.topology().clone();
                let mut relayed = Vec::new();
                for u in updates {
                    if topo.home_server(u.client) == Some(0) {
                        let to = NodeId::Client(u.client);
                        self.net.transmit(
                            PRIMARY,
                            to,
                            Message::Update(u.clone()),
                            now,
                            tick,
                            false,
                        );
                    } else {
                        relayed.push(u.clone());
                    }
                }
                let msg = Message::Snapshot {
                    tick,
                    updates: relayed,
                };
                self.net.transmit(PRIMARY, SECONDARY, msg, now, tick, false);
            }
        }
    }
}
