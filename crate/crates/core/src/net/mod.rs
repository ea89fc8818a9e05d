//! Seeded discrete-event network simulation.
//!
//! Links carry time-stamped packets with a base latency, a symmetric uniform
//! jitter and an independent loss probability. All randomness comes from one
//! seeded ChaCha stream per scenario, so equal seeds give equal event traces.

pub mod conditions;
pub mod jitter;
pub mod latency;
pub mod packet;
pub mod server;
pub mod sim;
pub mod topology;
pub mod transport;

pub use conditions::{NetConditions, Presets};
pub use jitter::JitterBuffer;
pub use latency::LatencyEstimator;
pub use packet::{NodeId, Packet};
pub use server::{PredictorMode, Server, ServerConfig, TickReport};
pub use sim::Simulation;
pub use topology::{traffic_count, Topology, TopologyKind};
pub use transport::{send, SeededStream, SendOutcome};
