//! One-to-many protocol: each host owns a set of nodes, cascades estimate
//! improvements internally to a fixpoint, and exchanges batched updates
//! with neighboring hosts under a broadcast or point-to-point policy.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::protocol::{compute_index, INFINITY};

pub type HostId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HostedError {
    #[error("host count must be >= 1")]
    ZeroHosts,
    #[error("host {receiver} received a batch from non-neighbor host {origin}")]
    NotANeighborHost { receiver: HostId, origin: HostId },
}

/// Dissemination policy for changed estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// One batch per round carrying all changed owned estimates, delivered
    /// to every neighbor host (counted once, as on a broadcast medium).
    Broadcast,
    /// Per-destination batches restricted to owned nodes with an edge into
    /// the destination host's partition.
    PointToPoint,
}

/// Node-to-host assignment `u -> u mod hosts`.
pub fn assign_hosts(n: usize, hosts: usize) -> Result<Vec<HostId>, HostedError> {
    if hosts == 0 {
        return Err(HostedError::ZeroHosts);
    }
    Ok((0..n).map(|u| (u % hosts) as HostId).collect())
}

/// Set of (node, estimate) pairs sent from one host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateBatch {
    pub origin: HostId,
    pub entries: Vec<(NodeId, u32)>,
}

/// What a host hands to the transport at the end of a round.
#[derive(Debug, Clone)]
pub enum Emission {
    /// One physical message replicated to each destination.
    Broadcast {
        batch: UpdateBatch,
        destinations: Vec<HostId>,
    },
    PerHost(Vec<(HostId, UpdateBatch)>),
}

impl Emission {
    /// Estimate entries this emission puts on the wire, under the
    /// once-per-round broadcast counting convention.
    pub fn wire_entries(&self) -> u64 {
        match self {
            Emission::Broadcast {
                batch,
                destinations,
            } => {
                if destinations.is_empty() {
                    0
                } else {
                    batch.entries.len() as u64
                }
            }
            Emission::PerHost(batches) => batches
                .iter()
                .map(|(_, b)| b.entries.len() as u64)
                .sum(),
        }
    }
}

/// Protocol state of one host.
#[derive(Debug, Clone)]
pub struct HostState {
    id: HostId,
    /// Owned node ids, ascending.
    owned: Vec<NodeId>,
    owned_set: HashSet<NodeId>,
    frontier_set: HashSet<NodeId>,
    /// Best-known estimate per node in owned ∪ frontier; absent = +infinity.
    est: HashMap<NodeId, u32>,
    changed: HashSet<NodeId>,
    /// For each neighbor host, the owned nodes with an edge into its
    /// partition (ascending).
    frontier_links: BTreeMap<HostId, Vec<NodeId>>,
    /// Batch entries for nodes this host neither owns nor borders, ignored
    /// on receipt.
    ignored_entries: u64,
}

impl HostState {
    /// Initialize host `x`: owned estimates start at degrees, the internal
    /// cascade runs once, and all owned pairs are announced.
    pub fn init(
        x: HostId,
        g: &Graph,
        assignment: &[HostId],
        policy: Policy,
    ) -> (HostState, Option<Emission>) {
        let mut state = HostState::new(x, g, assignment);
        let emission = state.announce_all(policy);
        (state, emission)
    }

    /// Build the host state without announcing anything.
    pub fn new(x: HostId, g: &Graph, assignment: &[HostId]) -> HostState {
        let owned: Vec<NodeId> = g.nodes().filter(|&u| assignment[u as usize] == x).collect();
        let owned_set: HashSet<NodeId> = owned.iter().copied().collect();
        let mut frontier_set = HashSet::new();
        let mut frontier_links: BTreeMap<HostId, Vec<NodeId>> = BTreeMap::new();
        for &u in &owned {
            for &v in g.neighbors(u) {
                if !owned_set.contains(&v) {
                    frontier_set.insert(v);
                    let y = assignment[v as usize];
                    let links = frontier_links.entry(y).or_default();
                    if links.last() != Some(&u) {
                        links.push(u);
                    }
                }
            }
        }
        let est: HashMap<NodeId, u32> =
            owned.iter().map(|&u| (u, g.degree(u) as u32)).collect();
        let mut state = HostState {
            id: x,
            owned,
            owned_set,
            frontier_set,
            est,
            changed: HashSet::new(),
            frontier_links,
            ignored_entries: 0,
        };
        state.improve_estimate(g);
        state.changed.clear();
        state
    }

    /// Announce every owned (node, estimate) pair, regardless of changed
    /// flags; the initial exchange of the protocol. Clears the flags.
    pub fn announce_all(&mut self, policy: Policy) -> Option<Emission> {
        self.changed.clear();
        self.emit_all_owned(policy)
    }

    pub fn id(&self) -> HostId {
        self.id
    }

    pub fn owned(&self) -> &[NodeId] {
        &self.owned
    }

    pub fn estimate_of(&self, v: NodeId) -> u32 {
        self.est.get(&v).copied().unwrap_or(INFINITY)
    }

    pub fn neighbor_hosts(&self) -> impl Iterator<Item = HostId> + '_ {
        self.frontier_links.keys().copied()
    }

    pub fn frontier_links(&self, y: HostId) -> &[NodeId] {
        self.frontier_links.get(&y).map_or(&[], Vec::as_slice)
    }

    pub fn ignored_entries(&self) -> u64 {
        self.ignored_entries
    }

    /// Internal cascade: recompute every owned node's estimate from the
    /// local view until a full pass produces no decrease. Pass order is
    /// ascending node id; the fixpoint does not depend on it. Returns the
    /// nodes whose estimate decreased.
    pub fn improve_estimate(&mut self, g: &Graph) -> Vec<NodeId> {
        let mut decreased = Vec::new();
        let mut again = true;
        while again {
            again = false;
            for i in 0..self.owned.len() {
                let u = self.owned[i];
                let k = self.est[&u];
                if k == 0 {
                    continue;
                }
                let t = compute_index(
                    g.neighbors(u).iter().map(|v| self.estimate_of(*v)),
                    k,
                )
                .expect("owned estimate is positive");
                if t < k {
                    self.est.insert(u, t);
                    self.changed.insert(u);
                    if !decreased.contains(&u) {
                        decreased.push(u);
                    }
                    again = true;
                }
            }
        }
        decreased.sort_unstable();
        decreased
    }

    /// Absorb a batch: frontier (and owned) estimates are lowered
    /// entry-wise, never raised, then the internal cascade runs. Entries
    /// for nodes outside owned ∪ frontier are counted and dropped; a
    /// broadcast medium may deliver batches this host has no use for.
    pub fn on_receive(&mut self, batch: &UpdateBatch, g: &Graph) -> Result<(), HostedError> {
        if batch.origin == self.id {
            return Ok(());
        }
        if !self.frontier_links.contains_key(&batch.origin) {
            return Err(HostedError::NotANeighborHost {
                receiver: self.id,
                origin: batch.origin,
            });
        }
        let mut lowered = false;
        for &(v, k) in &batch.entries {
            if !self.owned_set.contains(&v) && !self.frontier_set.contains(&v) {
                self.ignored_entries += 1;
                continue;
            }
            if k < self.estimate_of(v) {
                self.est.insert(v, k);
                if self.owned_set.contains(&v) {
                    self.changed.insert(v);
                }
                lowered = true;
            }
        }
        if lowered {
            self.improve_estimate(g);
        }
        Ok(())
    }

    /// Per-round emission of changed owned estimates; clears the flags.
    pub fn round_emit(&mut self, policy: Policy) -> Option<Emission> {
        if self.changed.is_empty() {
            return None;
        }
        let mut changed: Vec<NodeId> = self.changed.drain().collect();
        changed.sort_unstable();
        let emission = match policy {
            Policy::Broadcast => Emission::Broadcast {
                batch: UpdateBatch {
                    origin: self.id,
                    entries: changed.iter().map(|&u| (u, self.est[&u])).collect(),
                },
                destinations: self.frontier_links.keys().copied().collect(),
            },
            Policy::PointToPoint => {
                let mut batches = Vec::new();
                for (&y, links) in &self.frontier_links {
                    let entries: Vec<(NodeId, u32)> = links
                        .iter()
                        .filter(|u| changed.binary_search(u).is_ok())
                        .map(|&u| (u, self.est[&u]))
                        .collect();
                    if !entries.is_empty() {
                        batches.push((
                            y,
                            UpdateBatch {
                                origin: self.id,
                                entries,
                            },
                        ));
                    }
                }
                if batches.is_empty() {
                    return None;
                }
                Emission::PerHost(batches)
            }
        };
        Some(emission)
    }

    fn emit_all_owned(&self, policy: Policy) -> Option<Emission> {
        if self.owned.is_empty() {
            return None;
        }
        match policy {
            Policy::Broadcast => Some(Emission::Broadcast {
                batch: UpdateBatch {
                    origin: self.id,
                    entries: self.owned.iter().map(|&u| (u, self.est[&u])).collect(),
                },
                destinations: self.frontier_links.keys().copied().collect(),
            }),
            Policy::PointToPoint => {
                let mut batches = Vec::new();
                for (&y, links) in &self.frontier_links {
                    let entries: Vec<(NodeId, u32)> =
                        links.iter().map(|&u| (u, self.est[&u])).collect();
                    if !entries.is_empty() {
                        batches.push((
                            y,
                            UpdateBatch {
                                origin: self.id,
                                entries,
                            },
                        ));
                    }
                }
                (!batches.is_empty()).then_some(Emission::PerHost(batches))
            }
        }
    }
}
