//! Seeded packet transport: loss and jitter draws, and the event queue that
//! orders deliveries in simulated time.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::conditions::NetConditions;
use super::packet::NodeId;
use super::topology::Topology;

/// ChaCha8 stream that counts its draws.
#[derive(Debug, Clone)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    draws: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: u32) -> u32 {
        self.draws += 1;
        self.rng.random_range(0..n)
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SendOutcome {
    Scheduled { at: f64 },
    Dropped,
}

/// Decides the fate of one packet sent at `sent_at` over `link`. Every call takes
/// exactly two draws so the stream position does not depend on link parameters.
pub fn send(sent_at: f64, link: &NetConditions, rng: &mut SeededStream) -> SendOutcome {
    let loss_draw = rng.unit();
    let jitter_draw = rng.unit();
    if loss_draw < link.loss_prob {
        return SendOutcome::Dropped;
    }
    let offset = (2.0 * jitter_draw - 1.0) * link.jitter_ms;
    SendOutcome::Scheduled {
        at: sent_at + (link.base_latency_ms + offset).max(0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Delivery { from: NodeId, sent_at: f64 },
    Timer,
}

#[derive(Debug, Clone)]
pub struct Event<M> {
    pub at: f64,
    pub order: u64,
    pub to: NodeId,
    pub kind: EventKind,
    pub msg: M,
}

impl<M> Event<M> {
    /// Time spent on the wire; zero for timers.
    pub fn transit(&self) -> f64 {
        match self.kind {
            EventKind::Delivery { sent_at, .. } => self.at - sent_at,
            EventKind::Timer => 0.0,
        }
    }
}

impl<M> PartialEq for Event<M> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<M> Eq for Event<M> {}

impl<M> PartialOrd for Event<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<M> Ord for Event<M> {
    // reversed: BinaryHeap pops the earliest event, ties broken by insertion order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.order.cmp(&self.order))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrafficStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub in_flight: u64,
}

/// Links plus the pending-event queue of one scenario.
#[derive(Debug)]
pub struct Network<M> {
    topology: Topology,
    rng: SeededStream,
    queue: BinaryHeap<Event<M>>,
    order: u64,
    stats: TrafficStats,
    sent_per_round: BTreeMap<u64, u64>,
}

impl<M> Network<M> {
    pub fn new(topology: Topology, seed: u64) -> Self {
        Self {
            topology,
            rng: SeededStream::new(seed),
            queue: BinaryHeap::new(),
            order: 0,
            stats: TrafficStats::default(),
            sent_per_round: BTreeMap::new(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn stats(&self) -> TrafficStats {
        self.stats
    }

    pub fn rng_draws(&self) -> u64 {
        self.rng.draws()
    }

    /// Messages sent on behalf of `round`.
    pub fn sent_in_round(&self, round: u64) -> u64 {
        self.sent_per_round.get(&round).copied().unwrap_or(0)
    }

    fn push(&mut self, at: f64, to: NodeId, kind: EventKind, msg: M) {
        self.order += 1;
        self.queue.push(Event {
            at,
            order: self.order,
            to,
            kind,
            msg,
        });
    }

    /// Sends `msg` over the link between `from` and `to`. `force_drop` models a
    /// scripted loss; the packet still counts as sent.
    pub fn transmit(
        &mut self,
        from: NodeId,
        to: NodeId,
        msg: M,
        now: f64,
        round: u64,
        force_drop: bool,
    ) -> SendOutcome {
        let link = self
            .topology
            .link(from, to)
            .unwrap_or_else(|| panic!("no link between {from} and {to}"))
            .clone();
        self.stats.sent += 1;
        *self.sent_per_round.entry(round).or_default() += 1;
        let outcome = send(now, &link, &mut self.rng);
        match outcome {
            SendOutcome::Scheduled { at } if !force_drop => {
                self.stats.in_flight += 1;
                self.push(at, to, EventKind::Delivery { from, sent_at: now }, msg);
                outcome
            }
            _ => {
                self.stats.dropped += 1;
                SendOutcome::Dropped
            }
        }
    }

    /// Local wake-up at `at`; not network traffic.
    pub fn schedule_timer(&mut self, to: NodeId, at: f64, msg: M) {
        self.push(at, to, EventKind::Timer, msg);
    }

    /// Pops the next event at or before `until`.
    pub fn next_until(&mut self, until: f64) -> Option<Event<M>> {
        if self.queue.peek().is_some_and(|e| e.at <= until) {
            let e = self.queue.pop()?;
            if matches!(e.kind, EventKind::Delivery { .. }) {
                self.stats.in_flight -= 1;
                self.stats.delivered += 1;
            }
            Some(e)
        } else {
            None
        }
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::topology::Topology;
    use proptest::prelude::*;

    #[test]
    fn degenerate_link_is_exact() {
        let mut rng = SeededStream::new(1);
        let link = NetConditions::fixed(50.0);
        for t in [0.0, 13.5, 1e6] {
            assert_eq!(
                send(t, &link, &mut rng),
                SendOutcome::Scheduled { at: t + 50.0 }
            );
        }
        assert_eq!(rng.draws(), 6);
    }

    #[test]
    fn certain_loss() {
        let mut rng = SeededStream::new(2);
        let link = NetConditions::new("x", 10.0, 5.0, 1.0).unwrap();
        assert!((0..100).all(|_| send(0.0, &link, &mut rng) == SendOutcome::Dropped));
    }

    #[test]
    fn empirical_loss_rate() {
        let mut rng = SeededStream::new(0x5eed);
        let link = NetConditions::new("x", 10.0, 5.0, 0.1).unwrap();
        let dropped = (0..10_000)
            .filter(|_| send(0.0, &link, &mut rng) == SendOutcome::Dropped)
            .count();
        let rate = dropped as f64 / 10_000.0;
        assert!((rate - 0.1).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn events_pop_in_time_order() {
        let topo =
            Topology::client_server(2, NetConditions::new("x", 10.0, 9.0, 0.0).unwrap()).unwrap();
        let mut net: Network<u32> = Network::new(topo, 3);
        for i in 0..50 {
            net.transmit(
                NodeId::Client(1 + i % 2),
                NodeId::Server(0),
                i,
                f64::from(i),
                1,
                false,
            );
        }
        let mut last = f64::NEG_INFINITY;
        while let Some(e) = net.next_until(f64::INFINITY) {
            assert!(e.at >= last);
            assert!(e.transit() >= 1.0 - 1e-12);
            last = e.at;
        }
        assert_eq!(net.stats().delivered, 50);
    }

    proptest! {
        #[test]
        fn delay_bounds_and_conservation(seed in any::<u64>(), base in 0.1f64..100.0, jitter in 0.0f64..150.0, loss in 0.0f64..=1.0, horizon in 0.0f64..300.0) {
            let link = NetConditions::new("p", base, jitter, loss).unwrap();
            let (lo, hi) = link.delay_range();
            let topo = Topology::client_server(1, link).unwrap();
            let mut net: Network<()> = Network::new(topo, seed);
            for i in 0..40 {
                let now = f64::from(i) * 5.0;
                if let SendOutcome::Scheduled { at } = net.transmit(NodeId::Client(1), NodeId::Server(0), (), now, 1, false) {
                    prop_assert!(at - now >= lo - 1e-9 && at - now <= hi + 1e-9);
                }
            }
            while net.next_until(horizon).is_some() {
                let s = net.stats();
                prop_assert_eq!(s.sent, s.delivered + s.dropped + s.in_flight);
            }
            let s = net.stats();
            prop_assert_eq!(s.sent, s.delivered + s.dropped + s.in_flight);
        }
    }
}
