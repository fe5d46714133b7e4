//! Resource networks, Steiner trees over terminals, and level-scheduled
//! merge plans that distribute a GHZ state to the terminals.

mod execute;
mod schedule;
mod steiner;

pub use execute::{execute_schedule, DistributionResult, ExecutionMode, StepRecord};
pub use schedule::{plan_distribution, ResourceOrigin, ScheduleStep, ScheduledResource, StepPhase, SwapSchedule};
pub use steiner::{steiner_tree, SteinerTree};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type NodeId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    #[serde(default)]
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Bell,
    Ghz,
}

/// An elementary entangled resource, one site per party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub kind: ResourceKind,
    pub parties: Vec<NodeId>,
    /// Edge cost for routing; defaults to 1.
    #[serde(default = "unit_weight", skip_serializing_if = "is_unit")]
    pub weight: u32,
}

fn unit_weight() -> u32 {
    1
}

fn is_unit(w: &u32) -> bool {
    *w == 1
}

impl Resource {
    pub fn bell(a: NodeId, b: NodeId) -> Self {
        Self { kind: ResourceKind::Bell, parties: vec![a, b], weight: 1 }
    }

    pub fn ghz(parties: Vec<NodeId>) -> Self {
        Self { kind: ResourceKind::Ghz, parties, weight: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceNetwork {
    pub local_dim: usize,
    pub nodes: Vec<Node>,
    pub resources: Vec<Resource>,
}

impl ResourceNetwork {
    /// Build and validate.
    pub fn new(local_dim: usize, nodes: Vec<Node>, resources: Vec<Resource>) -> Result<Self> {
        let net = Self { local_dim, nodes, resources };
        net.validate()?;
        Ok(net)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.local_dim < 2 {
            return Err(Error::InvalidDimension(self.local_dim));
        }
        if self.nodes.is_empty() {
            return Err(Error::Network("network has no nodes".into()));
        }
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(Error::Network(format!("duplicate node id {}", n.id)));
            }
        }
        for (i, r) in self.resources.iter().enumerate() {
            match r.kind {
                ResourceKind::Bell if r.parties.len() != 2 => {
                    return Err(Error::Network(format!(
                        "resource {i}: Bell resource needs exactly 2 parties, got {}",
                        r.parties.len()
                    )));
                }
                ResourceKind::Ghz if r.parties.len() < 3 => {
                    return Err(Error::Network(format!(
                        "resource {i}: GHZ resource needs at least 3 parties, got {}",
                        r.parties.len()
                    )));
                }
                _ => {}
            }
            let mut seen = BTreeSet::new();
            for p in &r.parties {
                if !ids.contains(p) {
                    return Err(Error::Network(format!("resource {i} references unknown node {p}")));
                }
                if !seen.insert(p) {
                    return Err(Error::Network(format!("resource {i} lists node {p} twice")));
                }
            }
            if r.weight == 0 {
                return Err(Error::Network(format!("resource {i} has zero weight")));
            }
        }
        Ok(())
    }

    pub fn node_ids(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    /// Weighted adjacency implied by the resources (cheapest resource per pair).
    pub fn adjacency(&self) -> BTreeMap<NodeId, BTreeMap<NodeId, u32>> {
        let mut adj: BTreeMap<NodeId, BTreeMap<NodeId, u32>> =
            self.nodes.iter().map(|n| (n.id, BTreeMap::new())).collect();
        for r in &self.resources {
            for (i, &a) in r.parties.iter().enumerate() {
                for &b in &r.parties[i + 1..] {
                    for (x, y) in [(a, b), (b, a)] {
                        let w = adj.entry(x).or_default().entry(y).or_insert(r.weight);
                        *w = (*w).min(r.weight);
                    }
                }
            }
        }
        adj
    }

    /// Index of the first Bell resource joining `a` and `b`.
    pub fn bell_between(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.resources.iter().position(|r| {
            r.kind == ResourceKind::Bell && r.parties.contains(&a) && r.parties.contains(&b)
        })
    }

    pub fn any_resource_between(&self, a: NodeId, b: NodeId) -> bool {
        self.resources.iter().any(|r| r.parties.contains(&a) && r.parties.contains(&b))
    }
}

/// Read a network description from a JSON file.
pub fn load_network(path: impl AsRef<Path>) -> Result<ResourceNetwork> {
    ResourceNetwork::from_json_str(&std::fs::read_to_string(path)?)
}
