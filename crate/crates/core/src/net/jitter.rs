//! Reorder buffer for time-stamped packets.
//!
//! Packets are released strictly in sequence order. A packet whose predecessor is
//! missing waits until the predecessor arrives or the missing sequence numbers are
//! declared lost at a tick boundary. Release times keep the senders' spacing:
//! each packet is scheduled no earlier than the previous release plus the
//! difference in send timestamps.

use std::collections::BTreeMap;

use super::packet::Packet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Buffered,
    /// Sequence number already released or declared lost.
    Late,
    Duplicate,
}

/// Inclusive range of sequence numbers given up as lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub first: u64,
    pub last: u64,
}

impl Gap {
    pub fn len(&self) -> u64 {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Released<P> {
    pub packet: Packet<P>,
    pub arrived_at: f64,
    pub release_at: f64,
}

#[derive(Debug, Clone)]
pub struct JitterBuffer<P> {
    next_seq: u64,
    held: BTreeMap<u64, (Packet<P>, f64)>,
    gaps: Vec<Gap>,
    last_release: Option<(f64, f64)>,
}

impl<P> JitterBuffer<P> {
    pub fn new(first_seq: u64) -> Self {
        Self {
            next_seq: first_seq,
            held: BTreeMap::new(),
            gaps: Vec::new(),
            last_release: None,
        }
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn held(&self) -> usize {
        self.held.len()
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn lost(&self) -> u64 {
        self.gaps.iter().map(Gap::len).sum()
    }

    pub fn push(&mut self, packet: Packet<P>, arrived_at: f64) -> Admission {
        if packet.seq < self.next_seq {
            return Admission::Late;
        }
        if self.held.contains_key(&packet.seq) {
            return Admission::Duplicate;
        }
        self.held.insert(packet.seq, (packet, arrived_at));
        Admission::Buffered
    }

    /// Releases the run of consecutive packets starting at the next expected seq.
    pub fn pop_ready(&mut self, now: f64) -> Vec<Released<P>> {
        let mut out = Vec::new();
        while let Some((packet, arrived_at)) = self.held.remove(&self.next_seq) {
            out.push(self.release(packet, arrived_at, now));
        }
        out
    }

    /// Gives up on every sequence number below the highest held packet, then
    /// releases whatever became contiguous.
    pub fn tick_boundary(&mut self, now: f64) -> Vec<Released<P>> {
        let mut out = Vec::new();
        while let Some((&seq, _)) = self.held.first_key_value() {
            self.skip_to(seq);
            out.extend(self.pop_ready(now));
        }
        out
    }

    /// Releases everything up to and including `seq`, declaring missing numbers
    /// lost. Packets past `seq` stay held.
    pub fn release_through(&mut self, seq: u64, now: f64) -> Vec<Released<P>> {
        let mut out = Vec::new();
        while self.next_seq <= seq {
            out.extend(self.pop_ready(now));
            if self.next_seq > seq {
                break;
            }
            let target = self
                .held
                .range(self.next_seq..=seq)
                .next()
                .map_or(seq + 1, |(k, _)| *k);
            self.skip_to(target);
        }
        out
    }

    fn skip_to(&mut self, seq: u64) {
        if seq > self.next_seq {
            self.gaps.push(Gap {
                first: self.next_seq,
                last: seq - 1,
            });
            self.next_seq = seq;
        }
    }

    fn release(&mut self, packet: Packet<P>, arrived_at: f64, now: f64) -> Released<P> {
        let release_at = match self.last_release {
            None => now,
            Some((at, sent)) => now.max(at + (packet.sent_at - sent).max(0.0)),
        };
        self.last_release = Some((release_at, packet.sent_at));
        self.next_seq = packet.seq + 1;
        Released {
            packet,
            arrived_at,
            release_at,
        }
    }
}
