use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeId {
    Client(u32),
    Server(u8),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Client(c) => write!(f, "client{c}"),
            NodeId::Server(s) => write!(f, "server{s}"),
        }
    }
}

/// A time-stamped datagram. `seq` increases strictly per sender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet<P> {
    pub seq: u64,
    /// Simulated send time in ms.
    pub sent_at: f64,
    pub sender: NodeId,
    pub payload: P,
}

impl<P> Packet<P> {
    pub fn new(seq: u64, sent_at: f64, sender: NodeId, payload: P) -> Self {
        Self {
            seq,
            sent_at,
            sender,
            payload,
        }
    }
}
