//! Node graphs for the three architectures.

use serde::{Deserialize, Serialize};

use super::conditions::NetConditions;
use super::packet::NodeId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    P2p,
    #[default]
    ClientServer,
    NetworkServer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub conditions: NetConditions,
}

impl Link {
    fn joins(&self, x: NodeId, y: NodeId) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub kind: TopologyKind,
    /// Client ids are `1..=clients`.
    pub clients: u32,
    pub servers: u8,
    pub links: Vec<Link>,
}

impl Topology {
    /// Complete graph over the clients.
    pub fn p2p(clients: u32, link: NetConditions) -> Result<Self> {
        let mut links = Vec::new();
        for a in 1..=clients {
            for b in a + 1..=clients {
                links.push(Link {
                    a: NodeId::Client(a),
                    b: NodeId::Client(b),
                    conditions: link.clone(),
                });
            }
        }
        Self::checked(TopologyKind::P2p, clients, 0, links)
    }

    /// Every client attached to server 0.
    pub fn client_server(clients: u32, link: NetConditions) -> Result<Self> {
        let links = (1..=clients)
            .map(|c| Link {
                a: NodeId::Client(c),
                b: NodeId::Server(0),
                conditions: link.clone(),
            })
            .collect();
        Self::checked(TopologyKind::ClientServer, clients, 1, links)
    }

    /// Two servers joined by one link; odd clients on server 0, even on server 1.
    pub fn network_server(
        clients: u32,
        client_link: NetConditions,
        server_link: NetConditions,
    ) -> Result<Self> {
        let mut links = vec![Link {
            a: NodeId::Server(0),
            b: NodeId::Server(1),
            conditions: server_link,
        }];
        for c in 1..=clients {
            links.push(Link {
                a: NodeId::Client(c),
                b: NodeId::Server(Self::network_home(c)),
                conditions: client_link.clone(),
            });
        }
        Self::checked(TopologyKind::NetworkServer, clients, 2, links)
    }

    fn network_home(client: u32) -> u8 {
        if client % 2 == 1 {
            0
        } else {
            1
        }
    }

    fn checked(kind: TopologyKind, clients: u32, servers: u8, links: Vec<Link>) -> Result<Self> {
        let t = Self {
            kind,
            clients,
            servers,
            links,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for l in &self.links {
            l.conditions.validate()?;
            for n in [l.a, l.b] {
                let known = match n {
                    NodeId::Client(c) => (1..=self.clients).contains(&c),
                    NodeId::Server(s) => s < self.servers,
                };
                if !known {
                    return Err(Error::Config(format!("link references unknown node {n}")));
                }
            }
        }
        let count = |a, b| self.links.iter().filter(|l| l.joins(a, b)).count();
        match self.kind {
            TopologyKind::P2p => {
                for a in 1..=self.clients {
                    for b in a + 1..=self.clients {
                        if count(NodeId::Client(a), NodeId::Client(b)) != 1 {
                            return Err(Error::Config(format!(
                                "p2p needs exactly one link between clients {a} and {b}"
                            )));
                        }
                    }
                }
            }
            TopologyKind::ClientServer | TopologyKind::NetworkServer => {
                let expected = if self.kind == TopologyKind::ClientServer {
                    1
                } else {
                    2
                };
                if self.servers != expected {
                    return Err(Error::Config(format!(
                        "{:?} needs {expected} server(s), got {}",
                        self.kind, self.servers
                    )));
                }
                if expected == 2 && count(NodeId::Server(0), NodeId::Server(1)) != 1 {
                    return Err(Error::Config("servers must share exactly one link".into()));
                }
                for c in 1..=self.clients {
                    let homes = (0..self.servers)
                        .filter(|s| count(NodeId::Client(c), NodeId::Server(*s)) > 0)
                        .count();
                    if homes != 1 {
                        return Err(Error::Config(format!(
                            "client {c} must attach to exactly one server"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn link(&self, a: NodeId, b: NodeId) -> Option<&NetConditions> {
        self.links
            .iter()
            .find(|l| l.joins(a, b))
            .map(|l| &l.conditions)
    }

    /// Server a client talks to; `None` in peer-to-peer mode.
    pub fn home_server(&self, client: u32) -> Option<u8> {
        match self.kind {
            TopologyKind::P2p => None,
            TopologyKind::ClientServer => Some(0),
            TopologyKind::NetworkServer => Some(Self::network_home(client)),
        }
    }
}

/// Messages exchanged over `rounds` ticks with `clients` participants.
pub fn traffic_count(kind: TopologyKind, clients: u32, rounds: u64) -> Result<u64> {
    if clients == 0 {
        return Err(Error::invalid("clients", "must be >= 1"));
    }
    let n = u64::from(clients);
    let per_round = match kind {
        TopologyKind::P2p => n * (n - 1),
        TopologyKind::ClientServer => 2 * n,
        TopologyKind::NetworkServer => 2 * n + 2,
    };
    Ok(per_round * rounds)
}
